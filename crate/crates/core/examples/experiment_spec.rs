//! Drive an experiment from a JSON spec, as the command-line tool does.
//!
//! ```bash
//! cargo run --release --example experiment_spec -- /tmp/recover
//! ```

use std::path::PathBuf;

use wavejoint::workbench::{run_experiment, ExperimentSpec};

fn main() {
    let out: PathBuf = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("wavejoint-recover"), PathBuf::from);
    let spec = ExperimentSpec::from_json(
        r#"{
            "kind": "recover",
            "seed": 3,
            "n_targets": 2,
            "budget": 80,
            "bounds": { "alpha": [0, 12] }
        }"#,
    )
    .unwrap();
    for f in run_experiment(&spec, &out).unwrap() {
        println!("wrote {}", f.display());
    }
    print!("{}", std::fs::read_to_string(out.join("recovery.csv")).unwrap());
}
