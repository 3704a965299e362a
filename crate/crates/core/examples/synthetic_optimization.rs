//! Minimize the analytic test functions with the surrogate optimizer.
//!
//! ```bash
//! cargo run --release --example synthetic_optimization
//! ```

use wavejoint::optimizer::{minimize, Settings, StopRule, SyntheticObjective};
use wavejoint::oracle::synthetic::Synthetic;

fn main() {
    let settings = Settings::default();
    let cases = [
        (Synthetic::Sphere, 5, 100),
        (Synthetic::Rosenbrock, 2, 150),
        (Synthetic::MixedIntegerQuadratic, 5, 150),
    ];
    for (f, dim, budget) in cases {
        let obj = SyntheticObjective::new(f).with_dim(dim);
        let stop = StopRule { objective_threshold: 1e-8, ..StopRule::budget(budget) };
        let r = minimize(&obj, &stop, &[], &settings, 1).unwrap();
        let x: Vec<String> = r.best_x.as_ref().unwrap().iter().map(|v| format!("{v:.4}")).collect();
        println!(
            "{:<24} best {:.3e} after {:>3} evaluations ({:?}) at [{}]",
            f.name(),
            r.best_value.unwrap(),
            r.evaluations(),
            r.stop_reason,
            x.join(", ")
        );
        for (i, v) in r.trace.iter().enumerate().filter(|(i, _)| i % 25 == 24) {
            println!("    {:>4}: {v:.3e}", i + 1);
        }
    }
}
