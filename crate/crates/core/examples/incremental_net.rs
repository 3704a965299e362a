//! The incremental inverse network against the optimizer from the same small
//! dataset and budget.
//!
//! ```bash
//! cargo run --release --example incremental_net
//! ```

use wavejoint::baselines::{incremental_net, nearest_neighbor, IncrementalOptions};
use wavejoint::joint::default_bounds;
use wavejoint::optimizer::{minimize, Settings, StiffnessObjective, StopRule};
use wavejoint::workbench::{generate_dataset, reachable_targets, FidelityKind, OracleSpec};

fn main() {
    let bounds = default_bounds();
    let oracle = OracleSpec::default();
    let store = generate_dataset(50, 3, FidelityKind::Exact, &oracle, &bounds, None).unwrap();
    let data = store.dataset(None);
    let budget = 20;

    for (i, t) in reachable_targets(4, 8, &bounds, &oracle).unwrap().iter().enumerate() {
        let (_, nn) = nearest_neighbor(&data, &t.stiffness).unwrap();
        let inc = incremental_net(&data, &bounds, &t.stiffness, &oracle.exact(), budget, 1e-5, &IncrementalOptions::default())
            .unwrap();
        let obj = StiffnessObjective::new(bounds.clone(), t.stiffness, oracle.exact());
        let opt = minimize(&obj, &StopRule::budget(budget), &store.warm_start(&t.stiffness), &Settings::default(), i as u64)
            .unwrap();
        println!(
            "target {i}: nearest-neighbor {nn:.2e}  incremental net {:.2e} ({} evals, dataset {})  optimizer {:.2e}",
            inc.best_residual,
            inc.evaluations,
            inc.dataset_size,
            opt.best_value.unwrap()
        );
    }
}
