//! Warm-starting the optimizer from a store of earlier evaluations.
//!
//! ```bash
//! cargo run --release --example warm_start
//! ```

use wavejoint::joint::default_bounds;
use wavejoint::optimizer::{Settings, StopRule};
use wavejoint::workbench::{generate_dataset, reachable_targets, run_recovery_benchmark, FidelityKind, OracleSpec};

fn main() {
    let bounds = default_bounds();
    let oracle = OracleSpec::default();
    let settings = Settings::default();
    let stop = StopRule::budget(60);

    let store = generate_dataset(200, 77, FidelityKind::Exact, &oracle, &bounds, None).unwrap();
    let targets: Vec<_> = reachable_targets(3, 11, &bounds, &oracle).unwrap().into_iter().map(|t| t.config).collect();

    let cold = run_recovery_benchmark(&targets, None, &stop, 5, &settings, &bounds, &oracle).unwrap();
    let warm = run_recovery_benchmark(&targets, Some(&store), &stop, 5, &settings, &bounds, &oracle).unwrap();

    println!("target  cold: residual  first<1e-2   warm: start  residual  first<1e-2");
    for (i, (c, w)) in cold.rows.iter().zip(&warm.rows).enumerate() {
        println!(
            "{i:>6}  {:>14.2e}  {:>10?}   {:>11.2e}  {:>8.2e}  {:>10?}",
            c.residual.unwrap(),
            c.first_below_1e2,
            warm.reports[i].warm_best.unwrap(),
            w.residual.unwrap(),
            w.first_below_1e2,
        );
    }
}
