//! Map which stiffness targets a dataset can reach, as CSV tables.
//!
//! ```bash
//! cargo run --release --example reachability_heatmap -- /tmp/heatmap
//! ```

use std::path::PathBuf;

use wavejoint::joint::default_bounds;
use wavejoint::workbench::{export_reachability, generate_dataset, write_reachability, FidelityKind, GridSpec, OracleSpec};

fn main() {
    let out: PathBuf = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("wavejoint-heatmap"), PathBuf::from);
    let store = generate_dataset(300, 4, FidelityKind::Exact, &OracleSpec::default(), &default_bounds(), None).unwrap();
    let ks: Vec<_> = store.dataset(None).records().iter().map(|r| r.stiffness).collect();
    let tables = export_reachability(&ks, &GridSpec { resolution: 30, ..GridSpec::default() }).unwrap();

    // coarse text view of the first plane: '#' is within 5% of some stored stiffness
    let t = &tables[0];
    for row in t.rows.chunks(30).rev() {
        let line: String = row.iter().map(|&(_, _, inv)| if inv >= 20.0 { '#' } else if inv >= 5.0 { '+' } else { '.' }).collect();
        println!("{line}");
    }
    for f in write_reachability(&tables, &out).unwrap() {
        println!("wrote {}", f.display());
    }
}
