use wavejoint::baselines::{nearest_neighbor, train_inverse_net, zero_shot_net, NetHyper};
use wavejoint::joint::{default_bounds, validate_config};
use wavejoint::oracle::{residual, StiffnessOracle};
use wavejoint::workbench::{generate_dataset, FidelityKind, OracleSpec};

#[test]
fn trained_net_nearly_matches_nearest_neighbor_on_training_targets() {
    let b = default_bounds();
    let o = OracleSpec::default();
    let d = generate_dataset(100, 31, FidelityKind::Exact, &o, &b, None).unwrap().dataset(None);
    let net = train_inverse_net(&d, &b, &NetHyper::default()).unwrap();
    assert!(net.final_loss < net.initial_loss);
    for r in d.records().iter().take(20) {
        let (_, nn) = nearest_neighbor(&d, &r.stiffness).unwrap();
        assert_eq!(nn, 0.0);
        let p = zero_shot_net(&net, &r.stiffness, &b);
        assert!(validate_config(&p.config, &b).is_ok());
        let k = o.exact().evaluate(&p.config, 0).unwrap();
        let res = residual(&k, &r.stiffness).unwrap();
        assert!(res <= nn + 0.05, "{} -> {res}", r.config);
    }
}
