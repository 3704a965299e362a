//! Data-driven baselines: nearest-neighbor lookup, a feed-forward inverse
//! model and the incremental retrain-and-measure loop built on it.

mod incremental;
mod net;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::joint::JointConfig;
use crate::oracle::{residual, Fidelity, StiffnessTriple};

pub use incremental::{incremental_from, incremental_net, Augmentation, IncrementalOptions, IncrementalReport};
pub use net::{train_inverse_net, zero_shot_net, InverseNet, NetHyper, Prediction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("need at least {needed} observations, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("record {0} has a non-positive or non-finite stiffness")]
    BadStiffness(usize),
    #[error("target has a zero component")]
    ZeroTarget,
}

/// One successful past measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub config: JointConfig,
    pub stiffness: StiffnessTriple,
    pub fidelity: Fidelity,
}

/// Past measurements. Configs may lie outside the current bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<Record>,
}

impl Dataset {
    pub fn new(records: Vec<Record>) -> Result<Self, BaselineError> {
        let mut d = Dataset::default();
        for r in records {
            d.push(r)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, r: Record) -> Result<(), BaselineError> {
        if !r.stiffness.as_array().iter().all(|k| k.is_finite() && *k > 0.0) {
            return Err(BaselineError::BadStiffness(self.records.len()));
        }
        self.records.push(r);
        Ok(())
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Zero-shot lookup: the stored config whose stiffness has the smallest
/// residual against `target`. Ties go to the lowest index.
pub fn nearest_neighbor(d: &Dataset, target: &StiffnessTriple) -> Result<(JointConfig, f64), BaselineError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in d.records.iter().enumerate() {
        let v = residual(&r.stiffness, target).map_err(|_| BaselineError::ZeroTarget)?;
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    let (i, v) = best.ok_or(BaselineError::EmptyDataset)?;
    Ok((d.records[i].config, v))
}
