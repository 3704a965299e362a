//! Cheap noisy simulations with an exact measurement after every block.
//!
//! ```bash
//! cargo run --release --example milestone
//! ```

use wavejoint::joint::{default_bounds, JointConfig};
use wavejoint::optimizer::Settings;
use wavejoint::workbench::{run_milestone_experiment, run_single_shot, OracleSpec};

fn main() {
    let bounds = default_bounds();
    let oracle = OracleSpec::default();
    let target = JointConfig::new(22.0, 4.0, 11.0, 0.55, 8.0);
    let settings = Settings::default();

    let r = run_milestone_experiment(&target, 25, 6, 1e-3, 9, &settings, &bounds, &oracle).unwrap();
    println!("target {}", r.target.stiffness);
    println!(" sims  reals  simulated residual  real residual");
    for row in &r.milestone.log {
        println!(
            "{:>5}  {:>5}  {:>18.3e}  {:>13.3e}",
            row.simulations,
            row.reals,
            row.simulated_residual.unwrap_or(f64::NAN),
            row.real_residual.unwrap_or(f64::NAN)
        );
    }
    println!("stopped: {:?}", r.milestone.report.stop_reason);

    let s = run_single_shot(&target, 150, 9, &settings, &bounds, &oracle).unwrap();
    println!(
        "single shot after 150 simulations: simulated {:.3e}, real {:.3e}",
        s.simulated_residual.unwrap_or(f64::NAN),
        s.real_residual.unwrap_or(f64::NAN)
    );
}
