//! Zero-shot baselines: nearest neighbor in a stored dataset and a trained
//! inverse network, each proposing a design without new oracle calls.
//!
//! ```bash
//! cargo run --release --example zero_shot
//! ```

use wavejoint::baselines::{nearest_neighbor, train_inverse_net, zero_shot_net, NetHyper};
use wavejoint::joint::default_bounds;
use wavejoint::oracle::{residual, StiffnessOracle};
use wavejoint::workbench::{generate_dataset, reachable_targets, FidelityKind, OracleSpec};

fn main() {
    let bounds = default_bounds();
    let oracle = OracleSpec::default();
    let exact = oracle.exact();
    let data = generate_dataset(500, 1, FidelityKind::Exact, &oracle, &bounds, None).unwrap().dataset(None);
    let net = train_inverse_net(&data, &bounds, &NetHyper::default()).unwrap();
    println!("net loss {:.3e} -> {:.3e}", net.initial_loss, net.final_loss);

    println!("target  nearest-neighbor  net (checked with the oracle)");
    for (i, t) in reachable_targets(8, 2, &bounds, &oracle).unwrap().iter().enumerate() {
        let (_, nn) = nearest_neighbor(&data, &t.stiffness).unwrap();
        let p = zero_shot_net(&net, &t.stiffness, &bounds);
        let r = exact.evaluate(&p.config, 0).map(|k| residual(&k, &t.stiffness).unwrap());
        let clamped = if p.clamped { " (clamped)" } else { "" };
        println!("{i:>6}  {nn:>16.3e}  {:.3e}{clamped}", r.unwrap_or(f64::NAN));
    }
}
