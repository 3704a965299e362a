//! Generate an observation store on disk, reopen it and use it as a dataset.
//!
//! ```bash
//! cargo run --release --example dataset_store -- /tmp/obs.csv
//! ```

use std::path::PathBuf;

use wavejoint::joint::default_bounds;
use wavejoint::workbench::{generate_dataset, sidecar_path, FidelityKind, ObservationStore, OracleSpec};

fn main() {
    let path: PathBuf = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("wavejoint-obs.csv"), PathBuf::from);
    let store = generate_dataset(40, 12, FidelityKind::Noisy, &OracleSpec::default(), &default_bounds(), Some(&path)).unwrap();
    println!("wrote {} rows to {} (metadata in {})", store.len(), path.display(), sidecar_path(&path).display());

    let reopened = ObservationStore::open(&path).unwrap();
    assert_eq!(reopened.records(), store.records());
    for r in reopened.records().iter().take(5) {
        match r.stiffness {
            Some(k) => println!("{}  {k}  {}", r.config, r.fidelity),
            None => println!("{}  failed", r.config),
        }
    }
    let d = reopened.dataset(None);
    println!("{} usable records, seed {}", d.len(), reopened.meta.seed);
}
