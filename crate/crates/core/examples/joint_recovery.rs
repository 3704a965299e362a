//! Recover a joint design from the stiffness it produces.
//!
//! ```bash
//! cargo run --release --example joint_recovery
//! ```

use wavejoint::joint::{default_bounds, JointConfig};
use wavejoint::optimizer::{minimize, Settings, StiffnessObjective, StopRule};
use wavejoint::oracle::{BeamOracle, StiffnessOracle};

fn main() {
    let bounds = default_bounds();
    let oracle = BeamOracle::default();
    let hidden = JointConfig::new(20.0, 3.0, 10.0, 0.5, 24.0);
    let target = oracle.evaluate(&hidden, 0).unwrap();
    println!("target stiffness {target} (from {hidden})");

    let objective = StiffnessObjective::new(bounds, target, oracle);
    let report = minimize(&objective, &StopRule::budget(200), &[], &Settings::default(), 5).unwrap();

    let best = JointConfig::from_slice(report.best_x.as_ref().unwrap());
    println!("found   {best}");
    println!("stiffness {}", report.best_response.unwrap());
    println!("residual {:.2e} after {} evaluations ({:?})", report.best_value.unwrap(), report.evaluations(), report.stop_reason);
    for level in [1e-1, 1e-2, 1e-3, 1e-4] {
        match report.first_below(level) {
            Some(i) => println!("  below {level:e} at evaluation {i}"),
            None => println!("  never below {level:e}"),
        }
    }
}
