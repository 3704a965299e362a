//! Persistence and experiment drivers.
//!
//! Every driver returns an in-memory result whose `write` method emits CSV
//! data files into a directory. Wall-clock timings go to a separate
//! `timing.csv` so that the data files of two runs with the same spec are
//! byte-identical.

mod experiments;
mod reachability;
mod spec;
mod store;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::baselines::BaselineError;
use crate::optimizer::CannotPlaceDistinctPoints;
use crate::space::BoundsError;

pub use experiments::{
    generate_dataset, reachable_targets, run_incremental_eval, run_milestone_experiment, run_recovery_benchmark,
    run_single_shot, run_zero_shot_eval, Curve, IncrementalResults, IncrementalRow, MilestoneResults,
    RecoveryResults, RecoveryRow, SingleShot, Target, ZeroShotResults, ZeroShotRow,
};
pub use reachability::{export_reachability, write_reachability, GridSpec, ReachabilityTable, DISTANCE_FLOOR};
pub use spec::{apply_bounds_overrides, run_experiment, ExperimentKind, ExperimentSpec, FidelityKind, OracleSpec};
pub use store::{sidecar_path, ObservationStore, StoreMeta, StoredObservation, HEADER};

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("referenced file {0} does not exist")]
    MissingFile(PathBuf),
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error("target config {config} cannot be evaluated: {reason}")]
    TargetFailed { config: String, reason: String },
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Design(#[from] CannotPlaceDistinctPoints),
}

impl WorkbenchError {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            WorkbenchError::Io { .. } => "io",
            WorkbenchError::Format { .. } => "format",
            WorkbenchError::MissingFile(_) => "missing_file",
            WorkbenchError::Spec(_) => "invalid_spec",
            WorkbenchError::TargetFailed { .. } => "target_failed",
            WorkbenchError::Bounds(_) => "invalid_bounds",
            WorkbenchError::Baseline(BaselineError::EmptyDataset) => "empty_dataset",
            WorkbenchError::Baseline(BaselineError::InsufficientData { .. }) => "insufficient_data",
            WorkbenchError::Baseline(_) => "baseline",
            WorkbenchError::Design(_) => "cannot_place_distinct_points",
        }
    }
}

/// Write `rows` (first row is the header) as CSV.
pub(crate) fn write_csv(path: &std::path::Path, rows: &[Vec<String>]) -> Result<(), WorkbenchError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| WorkbenchError::Format { path: path.into(), message: e.to_string() })?;
    for r in rows {
        w.write_record(r).map_err(|e| WorkbenchError::Format { path: path.into(), message: e.to_string() })?;
    }
    w.flush().map_err(|source| WorkbenchError::Io { path: path.into(), source })
}

pub(crate) fn ensure_dir(dir: &std::path::Path) -> Result<(), WorkbenchError> {
    std::fs::create_dir_all(dir).map_err(|source| WorkbenchError::Io { path: dir.into(), source })
}

/// `v` formatted for a data file; empty for `None`.
pub(crate) fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
