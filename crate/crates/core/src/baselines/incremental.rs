use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::joint::{clamp_and_round, JointConfig};
use crate::optimizer::FIRST_FAILURE_PENALTY;
use crate::oracle::{residual, StiffnessOracle, StiffnessTriple};
use crate::space::Bounds;

use super::net::{train_inverse_net, zero_shot_net, InverseNet, NetHyper};
use super::{BaselineError, Dataset, Record};

/// Which pair is added to the dataset after a rejected prediction `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Augmentation {
    /// `(φ(x), x)`: the measured stiffness.
    #[default]
    Measured,
    /// `(T, x)`: the target, as if `x` had hit it.
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IncrementalOptions {
    pub hyper: NetHyper,
    /// Epochs of continued training after each augmentation.
    pub refine_epochs: usize,
    pub augmentation: Augmentation,
    pub seed: u64,
}

impl Default for IncrementalOptions {
    fn default() -> Self {
        IncrementalOptions { hyper: NetHyper::default(), refine_epochs: 100, augmentation: Augmentation::Measured, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementalReport {
    pub best_config: JointConfig,
    pub best_residual: f64,
    /// Residual of each evaluated prediction; failures carry the penalty.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub failures: usize,
    /// Size of the dataset when the loop stopped.
    pub dataset_size: usize,
}

/// Train a net on `d`, evaluate its projected prediction for `target`, add
/// the result to the data and retrain until the residual is at most `tol` or
/// `budget` evaluations are spent.
///
/// An oracle failure adds nothing; the next prediction has one coordinate
/// redrawn uniformly so the loop does not repeat the failing point.
pub fn incremental_net<O: StiffnessOracle + ?Sized>(
    d: &Dataset,
    bounds: &Bounds,
    target: &StiffnessTriple,
    oracle: &O,
    budget: usize,
    tol: f64,
    opts: &IncrementalOptions,
) -> Result<IncrementalReport, BaselineError> {
    let net = train_inverse_net(d, bounds, &opts.hyper)?;
    incremental_from(net, d, bounds, target, oracle, budget, tol, opts)
}

/// [`incremental_net`] starting from a net already trained on `d`.
#[allow(clippy::too_many_arguments)]
pub fn incremental_from<O: StiffnessOracle + ?Sized>(
    mut net: InverseNet,
    d: &Dataset,
    bounds: &Bounds,
    target: &StiffnessTriple,
    oracle: &O,
    budget: usize,
    tol: f64,
    opts: &IncrementalOptions,
) -> Result<IncrementalReport, BaselineError> {
    assert!(budget >= 1, "budget must be positive");
    if target.as_array().contains(&0.0) {
        return Err(BaselineError::ZeroTarget);
    }
    let mut data = d.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trace = Vec::with_capacity(budget);
    let mut best: Option<(JointConfig, f64)> = None;
    let mut failures = 0;
    let mut perturb = false;
    for it in 0..budget {
        let mut x = zero_shot_net(&net, target, bounds).config;
        if perturb {
            let mut a = x.to_array();
            let i = rng.gen_range(0..5);
            a[i] = rng.gen_range(bounds.var(i).lower..=bounds.var(i).upper);
            x = clamp_and_round(&a, bounds);
        }
        match oracle.evaluate(&x, it as u64) {
            Ok(k) => {
                perturb = false;
                let r = residual(&k, target).expect("target checked nonzero");
                trace.push(r);
                if best.is_none_or(|(_, b)| r < b) {
                    best = Some((x, r));
                }
                if r <= tol || it + 1 == budget {
                    break;
                }
                let stiffness = match opts.augmentation {
                    Augmentation::Measured => k,
                    Augmentation::Target => *target,
                };
                data.push(Record { config: x, stiffness, fidelity: oracle.fidelity() })?;
                net.refine(&data, opts.refine_epochs);
            }
            Err(e) => {
                log::debug!("prediction {x} failed: {e}");
                failures += 1;
                perturb = true;
                trace.push(FIRST_FAILURE_PENALTY);
                if best.is_none() && it + 1 == budget {
                    best = Some((x, FIRST_FAILURE_PENALTY));
                }
            }
        }
    }
    let (best_config, best_residual) = best.expect("at least one evaluation");
    Ok(IncrementalReport {
        best_config,
        best_residual,
        evaluations: trace.len(),
        trace,
        failures,
        dataset_size: data.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joint::{default_bounds, validate_config};
    use crate::optimizer::initial_design;
    use crate::oracle::{evaluate_stiffness, BeamOracle, FailingRegion, Fidelity, Material};

    fn beam_dataset(n: usize, seed: u64) -> Dataset {
        let pts = initial_design(&default_bounds(), n, seed).unwrap();
        let records = pts
            .iter()
            .map(|p| {
                let config = JointConfig::from_slice(p);
                let stiffness = evaluate_stiffness(&config, &Material::default(), 8).unwrap();
                Record { config, stiffness, fidelity: Fidelity::Exact }
            })
            .collect();
        Dataset::new(records).unwrap()
    }

    fn quick() -> IncrementalOptions {
        IncrementalOptions { hyper: NetHyper { epochs: 300, ..NetHyper::default() }, refine_epochs: 50, ..Default::default() }
    }

    fn oracle() -> BeamOracle {
        BeamOracle { material: Material::default(), mesh_density: 8 }
    }

    #[test]
    fn infinite_tolerance_stops_after_one_evaluation() {
        let b = default_bounds();
        let d = beam_dataset(20, 1);
        let t = evaluate_stiffness(&JointConfig::new(22.0, 4.0, 11.0, 0.55, 6.0), &Material::default(), 8).unwrap();
        let rep = incremental_net(&d, &b, &t, &oracle(), 10, f64::INFINITY, &quick()).unwrap();
        assert_eq!(rep.evaluations, 1);
        assert_eq!(rep.dataset_size, 20);
        let first = zero_shot_net(&train_inverse_net(&d, &b, &quick().hyper).unwrap(), &t, &b).config;
        assert_eq!(rep.best_config, first);
    }

    #[test]
    fn grows_by_one_per_rejection_and_respects_budget() {
        let b = default_bounds();
        let d = beam_dataset(15, 2);
        let t = evaluate_stiffness(&JointConfig::new(18.0, 5.0, 9.0, 0.52, 20.0), &Material::default(), 8).unwrap();
        for aug in [Augmentation::Measured, Augmentation::Target] {
            let opts = IncrementalOptions { augmentation: aug, ..quick() };
            let rep = incremental_net(&d, &b, &t, &oracle(), 6, 0.0, &opts).unwrap();
            assert_eq!(rep.evaluations, 6);
            assert_eq!(rep.dataset_size, 15 + 5);
            assert_eq!(rep.best_residual, rep.trace.iter().copied().fold(f64::INFINITY, f64::min));
            assert!(rep.best_residual <= rep.trace[0]);
            assert!(validate_config(&rep.best_config, &b).is_ok());
        }
    }

    #[test]
    fn failures_are_penalized_and_skipped() {
        let b = default_bounds();
        let d = beam_dataset(15, 3);
        let t = evaluate_stiffness(&JointConfig::new(20.0, 4.0, 10.0, 0.5, 12.0), &Material::default(), 8).unwrap();
        let always = FailingRegion { inner: oracle(), fails: |_: &JointConfig| true };
        let rep = incremental_net(&d, &b, &t, &always, 4, 1e-9, &quick()).unwrap();
        assert_eq!((rep.evaluations, rep.failures, rep.dataset_size), (4, 4, 15));
        assert!(rep.trace.iter().all(|r| *r == FIRST_FAILURE_PENALTY));
    }
}
