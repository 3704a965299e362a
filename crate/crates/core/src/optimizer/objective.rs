use crate::joint::JointConfig;
use crate::oracle::synthetic::Synthetic;
use crate::oracle::{residual, Fidelity, OracleOutcome, StiffnessOracle, StiffnessTriple};
use crate::space::Bounds;

use super::Observation;

/// A successful objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: f64,
    /// Stiffness behind the value, for joint problems.
    pub response: Option<StiffnessTriple>,
}

/// A black-box function over a bounded box.
pub trait Objective {
    fn bounds(&self) -> &Bounds;

    fn fidelity(&self) -> Fidelity {
        Fidelity::Exact
    }

    /// `Err` carries the failure reason; the optimizer penalizes it.
    fn evaluate(&self, x: &[f64], nonce: u64) -> Result<Evaluated, String>;
}

/// Residual of an oracle's stiffness against a target.
pub struct StiffnessObjective<O> {
    pub bounds: Bounds,
    pub target: StiffnessTriple,
    pub oracle: O,
}

impl<O: StiffnessOracle> StiffnessObjective<O> {
    pub fn new(bounds: Bounds, target: StiffnessTriple, oracle: O) -> Self {
        assert!(target.as_array().iter().all(|t| *t != 0.0), "target components must be nonzero");
        StiffnessObjective { bounds, target, oracle }
    }
}

impl<O: StiffnessOracle> Objective for StiffnessObjective<O> {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn fidelity(&self) -> Fidelity {
        self.oracle.fidelity()
    }

    fn evaluate(&self, x: &[f64], nonce: u64) -> Result<Evaluated, String> {
        let cfg = JointConfig::from_slice(x);
        let k = self.oracle.evaluate(&cfg, nonce).map_err(|e| e.to_string())?;
        let value = residual(&k, &self.target).map_err(|e| e.to_string())?;
        Ok(Evaluated { value, response: Some(k) })
    }
}

/// Turn stored stiffness measurements into warm-start observations for `target`.
pub fn warm_observations<'a, I>(records: I, target: &StiffnessTriple) -> Vec<Observation>
where
    I: IntoIterator<Item = (&'a JointConfig, &'a OracleOutcome, Fidelity)>,
{
    records
        .into_iter()
        .map(|(cfg, outcome, fidelity)| match outcome {
            Ok(k) => Observation {
                x: cfg.to_array().to_vec(),
                value: residual(k, target).ok(),
                fidelity,
                response: Some(*k),
            },
            Err(_) => Observation::failed(cfg.to_array().to_vec(), fidelity),
        })
        .collect()
}

/// One of the analytic test functions on its conventional box.
pub struct SyntheticObjective {
    pub function: Synthetic,
    pub bounds: Bounds,
}

impl SyntheticObjective {
    pub fn new(function: Synthetic) -> Self {
        SyntheticObjective { function, bounds: function.bounds(5) }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.bounds = self.function.bounds(dim);
        self
    }
}

impl Objective for SyntheticObjective {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64], _nonce: u64) -> Result<Evaluated, String> {
        let value = self.function.eval(x).map_err(|e| e.to_string())?;
        Ok(Evaluated { value, response: None })
    }
}

/// Closure-backed objective.
pub struct FnObjective<F> {
    bounds: Bounds,
    f: F,
}

impl<F: Fn(&[f64]) -> Result<f64, String>> FnObjective<F> {
    pub fn new(bounds: Bounds, f: F) -> Self {
        FnObjective { bounds, f }
    }
}

impl<F: Fn(&[f64]) -> Result<f64, String>> Objective for FnObjective<F> {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64], _nonce: u64) -> Result<Evaluated, String> {
        (self.f)(x).map(|value| Evaluated { value, response: None })
    }
}
