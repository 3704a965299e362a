//! Stiffness of a few joint configs from the exact and the noisy beam oracle.
//!
//! ```bash
//! cargo run --release --example oracle_eval
//! ```

use wavejoint::joint::{default_bounds, validate_config, wave_profile, JointConfig};
use wavejoint::oracle::{residual, BeamOracle, FailingRegion, NoisyBeamOracle, StiffnessOracle};

fn main() {
    let bounds = default_bounds();
    let exact = BeamOracle::default();
    let noisy = NoisyBeamOracle::new(0.30, 7);

    let configs = [
        JointConfig::new(20.0, 4.0, 10.0, 0.5, 12.0),
        JointConfig::new(28.0, 6.0, 13.0, 0.6, 0.0),
        JointConfig::new(15.0, 3.0, 8.0, 0.55, 24.0),
    ];
    for cfg in &configs {
        assert!(validate_config(cfg, &bounds).is_ok());
        let k = exact.evaluate(cfg, 0).unwrap();
        println!("{cfg}");
        println!("  exact  {k}");
        for nonce in 0..3 {
            let kn = noisy.evaluate(cfg, nonce).unwrap();
            println!("  noisy  {kn}  residual vs exact {:.3e}", residual(&kn, &k).unwrap());
        }
        let start = wave_profile(cfg, 0.0).unwrap();
        println!("  wave period {:.3} mm, wall offset at the root {start:.3} mm", cfg.period());
    }

    // an oracle that refuses part of the space reports a reason instead of a value
    let flaky = FailingRegion { inner: exact, fails: |c: &JointConfig| c.alpha > 20.0 };
    match flaky.evaluate(&configs[2], 0) {
        Ok(k) => println!("unexpected success {k}"),
        Err(e) => println!("failure: {e}"),
    }
}
