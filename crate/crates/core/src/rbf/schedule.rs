use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exploration weights cycled through by successive acquisitions.
pub const DEFAULT_WEIGHT_CYCLE: [f64; 5] = [5.0, 2.0, 1.0, 0.5, 0.0];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("weight cycle must be non-empty, finite, non-negative and contain a zero")]
pub struct InvalidSchedule;

/// Cyclic schedule of exploration weights `w_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UncertaintySchedule {
    cycle: Vec<f64>,
}

impl UncertaintySchedule {
    pub fn new(cycle: Vec<f64>) -> Result<Self, InvalidSchedule> {
        let ok = !cycle.is_empty()
            && cycle.iter().all(|w| w.is_finite() && *w >= 0.0)
            && cycle.contains(&0.0);
        if ok {
            Ok(UncertaintySchedule { cycle })
        } else {
            Err(InvalidSchedule)
        }
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.cycle[k % self.cycle.len()]
    }

    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Default for UncertaintySchedule {
    fn default() -> Self {
        UncertaintySchedule { cycle: DEFAULT_WEIGHT_CYCLE.to_vec() }
    }
}

impl TryFrom<Vec<f64>> for UncertaintySchedule {
    type Error = InvalidSchedule;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        UncertaintySchedule::new(v)
    }
}

impl From<UncertaintySchedule> for Vec<f64> {
    fn from(s: UncertaintySchedule) -> Self {
        s.cycle
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles() {
        let s = UncertaintySchedule::default();
        let w: Vec<f64> = (0..7).map(|k| s.weight(k)).collect();
        assert_eq!(w, vec![5.0, 2.0, 1.0, 0.5, 0.0, 5.0, 2.0]);
    }

    #[test]
    fn rejects_bad_cycles() {
        assert!(UncertaintySchedule::new(vec![]).is_err());
        assert!(UncertaintySchedule::new(vec![1.0, 2.0]).is_err());
        assert!(UncertaintySchedule::new(vec![1.0, -1.0, 0.0]).is_err());
        assert!(UncertaintySchedule::new(vec![f64::INFINITY, 0.0]).is_err());
        assert!(UncertaintySchedule::new(vec![0.0]).is_ok());
    }
}
