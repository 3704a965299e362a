use serde::{Deserialize, Serialize};

use crate::oracle::StiffnessTriple;

use super::{CannotPlaceDistinctPoints, Objective, Observation, Run, RunReport, Settings, StopReason};

/// One milestone: the simulator's view of the chosen point next to its
/// exact measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilestoneRow {
    pub milestone: usize,
    /// Cumulative noisy evaluations.
    pub simulations: usize,
    /// Cumulative exact evaluations.
    pub reals: usize,
    pub x: Vec<f64>,
    pub simulated: Option<StiffnessTriple>,
    pub simulated_residual: Option<f64>,
    pub real: Option<StiffnessTriple>,
    pub real_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilestoneReport {
    /// Best fields refer to the best exact measurement.
    pub report: RunReport,
    pub log: Vec<MilestoneRow>,
}

/// Alternate `sims_per_real` noisy evaluations with one exact evaluation of
/// the best simulated point not yet measured, until a measurement is within
/// `accept_threshold` or `max_reals` measurements were made.
///
/// Exact measurements join the archive and supersede the simulated value at
/// the same point in later surrogates.
#[allow(clippy::too_many_arguments)]
pub fn run_milestone<N: Objective + ?Sized, E: Objective + ?Sized>(
    noisy: &N,
    exact: &E,
    sims_per_real: usize,
    max_reals: usize,
    accept_threshold: f64,
    warm_start: &[Observation],
    settings: &Settings,
    seed: u64,
) -> Result<MilestoneReport, CannotPlaceDistinctPoints> {
    assert!(sims_per_real >= 1 && max_reals >= 1, "need at least one simulation and one measurement");
    let mut run = Run::start(noisy, warm_start, settings, seed)?;
    let mut measured: Vec<Vec<f64>> = Vec::new();
    let mut log = Vec::new();
    let mut reason = StopReason::Budget;
    for m in 1..=max_reals {
        let mut last = None;
        for _ in 0..sims_per_real {
            let x = run.next_point();
            last = Some(run.evaluate(noisy, x));
        }
        let candidate = run
            .state
            .observations()
            .filter(|o| !o.fidelity.is_exact() && o.value.is_some() && !measured.contains(&o.x))
            .min_by(|a, b| a.value.unwrap().total_cmp(&b.value.unwrap()))
            .cloned()
            .or(last)
            .expect("at least one simulation per block");
        let real = run.evaluate(exact, candidate.x.clone());
        measured.push(candidate.x.clone());
        log.push(MilestoneRow {
            milestone: m,
            simulations: run.report.noisy_evaluations + noisy_failures(&run.report),
            reals: run.report.exact_evaluations + exact_failures(&run.report),
            x: candidate.x,
            simulated: candidate.response,
            simulated_residual: candidate.value,
            real: real.response,
            real_residual: real.value,
        });
        if real.value.is_some_and(|v| v <= accept_threshold) {
            reason = StopReason::Accepted;
            break;
        }
    }
    let mut report = run.finish(reason);
    let best_real = log.iter().filter(|r| r.real_residual.is_some()).min_by(|a, b| {
        a.real_residual.unwrap().total_cmp(&b.real_residual.unwrap())
    });
    report.best_x = best_real.map(|r| r.x.clone());
    report.best_value = best_real.and_then(|r| r.real_residual);
    report.best_response = best_real.and_then(|r| r.real);
    report.best_validated = best_real.is_some();
    Ok(MilestoneReport { report, log })
}

fn noisy_failures(r: &RunReport) -> usize {
    r.evaluations.iter().filter(|o| o.value.is_none() && !o.fidelity.is_exact()).count()
}

fn exact_failures(r: &RunReport) -> usize {
    r.evaluations.iter().filter(|o| o.value.is_none() && o.fidelity.is_exact()).count()
}
