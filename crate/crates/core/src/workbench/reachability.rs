use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineError;
use crate::oracle::StiffnessTriple;

use super::{ensure_dir, write_csv, WorkbenchError};

/// Smallest distance used in `1/d`, so that exact hits stay finite.
pub const DISTANCE_FLOOR: f64 = 1e-6;

const NAMES: [&str; 3] = ["k_xi", "k_eta", "k_zeta"];
const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Grid points per axis.
    pub resolution: usize,
    /// Space the grid geometrically instead of linearly.
    #[serde(default = "yes")]
    pub log_spaced: bool,
    /// Per-stiffness `[lo, hi]`; `None` spans the data widened by a factor of
    /// 2 on each side.
    #[serde(default)]
    pub ranges: Option<[[f64; 2]; 3]>,
}

fn yes() -> bool {
    true
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { resolution: 50, log_spaced: true, ranges: None }
    }
}

impl GridSpec {
    fn axis(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.resolution;
        if n == 1 {
            return vec![if self.log_spaced { (lo * hi).sqrt() } else { 0.5 * (lo + hi) }];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log_spaced {
                    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + t * (hi - lo)
                }
            })
            .collect()
    }
}

/// `1/max(d, ε)` over one stiffness plane, row-major in the first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachabilityTable {
    pub axes: (usize, usize),
    /// `(grid x, grid y, 1/d_closest)`
    pub rows: Vec<(f64, f64, f64)>,
}

impl ReachabilityTable {
    pub fn file_name(&self) -> String {
        format!("heatmap_{}_{}.csv", NAMES[self.axes.0], NAMES[self.axes.1])
    }
}

/// For each grid target in the three stiffness planes, the inverse relative
/// distance to the closest stored stiffness.
///
/// Distances are Euclidean in the plane after dividing each coordinate
/// difference by the grid target's coordinate.
pub fn export_reachability(stiffness: &[StiffnessTriple], grid: &GridSpec) -> Result<Vec<ReachabilityTable>, WorkbenchError> {
    if stiffness.is_empty() {
        return Err(BaselineError::EmptyDataset.into());
    }
    if grid.resolution == 0 {
        return Err(WorkbenchError::Spec("grid resolution must be positive".into()));
    }
    let ranges = match grid.ranges {
        Some(r) => r,
        None => std::array::from_fn(|i| {
            let (lo, hi) = stiffness
                .iter()
                .map(|k| k.as_array()[i])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            [lo / 2.0, hi * 2.0]
        }),
    };
    if ranges.iter().any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo <= hi)) {
        return Err(WorkbenchError::Spec(format!("grid ranges {ranges:?} must be positive and ordered")));
    }
    let axes: Vec<Vec<f64>> = ranges.iter().map(|[lo, hi]| grid.axis(*lo, *hi)).collect();
    let points: Vec<[f64; 3]> = stiffness.iter().map(|k| k.as_array()).collect();
    Ok(PAIRS
        .iter()
        .map(|&(a, b)| {
            let mut rows = Vec::with_capacity(grid.resolution * grid.resolution);
            for &x in &axes[a] {
                for &y in &axes[b] {
                    let d2 = points
                        .iter()
                        .map(|p| ((p[a] - x) / x).powi(2) + ((p[b] - y) / y).powi(2))
                        .fold(f64::INFINITY, f64::min);
                    rows.push((x, y, 1.0 / d2.sqrt().max(DISTANCE_FLOOR)));
                }
            }
            ReachabilityTable { axes: (a, b), rows }
        })
        .collect())
}

/// One CSV per plane with columns `<x>,<y>,inv_distance`, plus `heatmap.json`
/// recording the metric and the grid actually used.
pub fn write_reachability(tables: &[ReachabilityTable], dir: &Path) -> Result<Vec<PathBuf>, WorkbenchError> {
    ensure_dir(dir)?;
    let mut files = Vec::new();
    let mut planes = Vec::new();
    for t in tables {
        let mut rows = vec![vec![NAMES[t.axes.0].to_string(), NAMES[t.axes.1].to_string(), "inv_distance".to_string()]];
        rows.extend(t.rows.iter().map(|(x, y, v)| vec![x.to_string(), y.to_string(), v.to_string()]));
        let path = dir.join(t.file_name());
        write_csv(&path, &rows)?;
        let span = |f: fn(&(f64, f64, f64)) -> f64| {
            t.rows.iter().map(f).fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], v| [lo.min(v), hi.max(v)])
        };
        planes.push(serde_json::json!({
            "file": t.file_name(),
            "x": NAMES[t.axes.0],
            "y": NAMES[t.axes.1],
            "x_range": span(|r| r.0),
            "y_range": span(|r| r.1),
            "resolution": (t.rows.len() as f64).sqrt().round() as usize,
        }));
        files.push(path);
    }
    let meta = serde_json::json!({
        "value": "1 / max(d_closest, floor)",
        "distance": "euclidean in the plane, each difference divided by the grid point's coordinate",
        "floor": DISTANCE_FLOOR,
        "planes": planes,
    });
    let path = dir.join("heatmap.json");
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    std::fs::write(&path, text).map_err(|source| WorkbenchError::Io { path: path.clone(), source })?;
    files.push(path);
    Ok(files)
}
