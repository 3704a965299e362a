use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::baselines::{
    incremental_from, nearest_neighbor, train_inverse_net, zero_shot_net, Dataset, IncrementalOptions, NetHyper,
};
use crate::joint::{JointConfig, VARIABLE_NAMES};
use crate::optimizer::{
    initial_design, minimize, run_milestone, MilestoneReport, RunReport, Settings, StiffnessObjective, StopRule,
    FIRST_FAILURE_PENALTY,
};
use crate::oracle::{mix_seed, residual, StiffnessOracle, StiffnessTriple};
use crate::space::Bounds;

use super::spec::{FidelityKind, OracleSpec};
use super::store::{ObservationStore, StoreMeta, StoredObservation};
use super::{cell, ensure_dir, write_csv, WorkbenchError};

/// A target stiffness together with a config known to produce it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Target {
    pub config: JointConfig,
    pub stiffness: StiffnessTriple,
}

fn config_cells(c: &JointConfig) -> Vec<String> {
    c.to_array().iter().map(|v| v.to_string()).collect()
}

fn stiffness_cells(k: Option<&StiffnessTriple>) -> Vec<String> {
    match k {
        Some(k) => k.as_array().iter().map(|v| v.to_string()).collect(),
        None => vec![String::new(); 3],
    }
}

fn prefixed(prefix: &str, names: &[&str]) -> Vec<String> {
    names.iter().map(|n| format!("{prefix}{n}")).collect()
}

const K_NAMES: [&str; 3] = ["k_xi", "k_eta", "k_zeta"];

/// Evaluate `n` Latin-hypercube configs through the chosen oracle. With a
/// `path` the store is written there as it fills.
pub fn generate_dataset(
    n: usize,
    seed: u64,
    fidelity: FidelityKind,
    oracle: &OracleSpec,
    bounds: &Bounds,
    path: Option<&Path>,
) -> Result<ObservationStore, WorkbenchError> {
    if n == 0 {
        return Err(WorkbenchError::Spec("dataset size must be at least 1".into()));
    }
    let meta = StoreMeta {
        bounds: bounds.clone(),
        material: oracle.material,
        exact_mesh_density: oracle.exact_mesh_density,
        noisy_mesh_density: oracle.noisy_mesh_density,
        ..StoreMeta::new(seed)
    };
    let mut store = match path {
        Some(p) => ObservationStore::create(p, meta)?,
        None => ObservationStore::in_memory(meta),
    };
    let o = oracle.build(fidelity, seed);
    let run_id = format!("gen-{seed}");
    let rows: Vec<StoredObservation> = initial_design(bounds, n, seed)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let c = JointConfig::from_slice(x);
            StoredObservation::from_outcome(c, &o.evaluate(&c, i as u64), o.fidelity(), &run_id)
        })
        .collect();
    store.extend(rows)?;
    Ok(store)
}

/// `n` targets produced by the exact oracle at random in-bounds configs.
pub fn reachable_targets(n: usize, seed: u64, bounds: &Bounds, oracle: &OracleSpec) -> Result<Vec<Target>, WorkbenchError> {
    let exact = oracle.exact();
    let mut out = Vec::with_capacity(n);
    let mut round = 0;
    while out.len() < n {
        if round == 10 {
            return Err(WorkbenchError::Spec(format!("could not find {n} configs the oracle can evaluate")));
        }
        for x in initial_design(bounds, n, mix_seed(seed, round))? {
            let config = JointConfig::from_slice(&x);
            if let Ok(stiffness) = exact.evaluate(&config, 0) {
                if out.len() < n {
                    out.push(Target { config, stiffness });
                }
            }
        }
        round += 1;
    }
    Ok(out)
}

fn target_of(config: &JointConfig, oracle: &OracleSpec) -> Result<Target, WorkbenchError> {
    let stiffness = oracle
        .exact()
        .evaluate(config, 0)
        .map_err(|e| WorkbenchError::TargetFailed { config: config.to_string(), reason: e.to_string() })?;
    Ok(Target { config: *config, stiffness })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// One empirical-CDF curve: residuals sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub method: String,
    pub size: usize,
    /// Evaluation budget, `None` for zero-shot methods.
    pub budget: Option<usize>,
    pub residuals: Vec<f64>,
}

impl Curve {
    fn new(method: &str, size: usize, budget: Option<usize>, mut residuals: Vec<f64>) -> Self {
        residuals.sort_by(f64::total_cmp);
        Curve { method: method.to_string(), size, budget, residuals }
    }

    pub fn median(&self) -> f64 {
        median(&self.residuals)
    }
}

fn write_curves(path: &Path, curves: &[Curve]) -> Result<(), WorkbenchError> {
    let mut rows = vec![["method", "size", "budget", "rank", "residual", "fraction"].map(String::from).to_vec()];
    for c in curves {
        let n = c.residuals.len();
        for (i, r) in c.residuals.iter().enumerate() {
            rows.push(vec![
                c.method.clone(),
                c.size.to_string(),
                c.budget.map(|b| b.to_string()).unwrap_or_default(),
                (i + 1).to_string(),
                r.to_string(),
                ((i + 1) as f64 / n as f64).to_string(),
            ]);
        }
    }
    write_csv(path, &rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryRow {
    pub target: Target,
    pub final_config: Option<JointConfig>,
    pub final_stiffness: Option<StiffnessTriple>,
    pub residual: Option<f64>,
    pub evaluations: usize,
    /// First evaluation index with best residual below 1e-2 (0: warm data already was).
    pub first_below_1e2: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RecoveryResults {
    pub rows: Vec<RecoveryRow>,
    pub reports: Vec<RunReport>,
}

/// One optimizer run per target config, seeded `seed + i`, optionally warm
/// started from every evaluation in `warm`.
pub fn run_recovery_benchmark(
    targets: &[JointConfig],
    warm: Option<&ObservationStore>,
    stop: &StopRule,
    seed: u64,
    settings: &Settings,
    bounds: &Bounds,
    oracle: &OracleSpec,
) -> Result<RecoveryResults, WorkbenchError> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (i, cfg) in targets.iter().enumerate() {
        let target = target_of(cfg, oracle)?;
        let objective = StiffnessObjective::new(bounds.clone(), target.stiffness, oracle.exact());
        let warm_obs = warm.map(|s| s.warm_start(&target.stiffness)).unwrap_or_default();
        let report = minimize(&objective, stop, &warm_obs, settings, seed + i as u64)?;
        log::info!("target {i}: best residual {:?} after {} evaluations", report.best_value, report.evaluations());
        rows.push(RecoveryRow {
            target,
            final_config: report.best_x.as_deref().map(JointConfig::from_slice),
            final_stiffness: report.best_response,
            residual: report.best_value,
            evaluations: report.evaluations(),
            first_below_1e2: report.first_below(1e-2),
        });
        reports.push(report);
    }
    Ok(RecoveryResults { rows, reports })
}

impl RecoveryResults {
    /// `recovery.csv` (one row per target), `traces.csv` (running best per
    /// evaluation) and `timing.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, WorkbenchError> {
        ensure_dir(dir)?;
        let mut header = vec!["target".to_string()];
        header.extend(prefixed("target_", &VARIABLE_NAMES));
        header.extend(prefixed("final_", &VARIABLE_NAMES));
        header.extend(prefixed("target_", &K_NAMES));
        header.extend(prefixed("final_", &K_NAMES));
        header.extend(["residual", "evaluations", "first_below_1e-2"].map(String::from));
        let mut table = vec![header];
        for (i, r) in self.rows.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(config_cells(&r.target.config));
            match &r.final_config {
                Some(c) => row.extend(config_cells(c)),
                None => row.extend(vec![String::new(); 5]),
            }
            row.extend(stiffness_cells(Some(&r.target.stiffness)));
            row.extend(stiffness_cells(r.final_stiffness.as_ref()));
            row.push(cell(r.residual));
            row.push(r.evaluations.to_string());
            row.push(r.first_below_1e2.map(|v| v.to_string()).unwrap_or_default());
            table.push(row);
        }
        let mut traces = vec![["target", "evaluation", "best_residual"].map(String::from).to_vec()];
        let mut timing = vec![["target", "wall_time_s"].map(String::from).to_vec()];
        for (i, rep) in self.reports.iter().enumerate() {
            for (j, v) in rep.trace.iter().enumerate() {
                traces.push(vec![i.to_string(), (j + 1).to_string(), v.to_string()]);
            }
            timing.push(vec![i.to_string(), format!("{:.3}", rep.wall_time)]);
        }
        let files = [dir.join("recovery.csv"), dir.join("traces.csv"), dir.join("timing.csv")];
        write_csv(&files[0], &table)?;
        write_csv(&files[1], &traces)?;
        write_csv(&files[2], &timing)?;
        Ok(files.to_vec())
    }
}

fn dataset_of_size(
    size: usize,
    seed: u64,
    store: Option<&ObservationStore>,
    bounds: &Bounds,
    oracle: &OracleSpec,
) -> Result<(Dataset, ObservationStore), WorkbenchError> {
    let s = match store {
        Some(s) => {
            let d = s.dataset(Some(size));
            if d.len() < size {
                return Err(WorkbenchError::Spec(format!("store has {} successful records, {size} requested", d.len())));
            }
            let mut sub = ObservationStore::in_memory(s.meta.clone());
            sub.extend(s.records().iter().filter(|r| !r.failed()).take(size).cloned())?;
            sub
        }
        None => generate_dataset(size, seed, FidelityKind::Exact, oracle, bounds, None)?,
    };
    Ok((s.dataset(None), s))
}

fn oracle_residual<O: StiffnessOracle>(oracle: &O, cfg: &JointConfig, target: &StiffnessTriple) -> f64 {
    oracle.evaluate(cfg, 0).ok().and_then(|k| residual(&k, target).ok()).unwrap_or(FIRST_FAILURE_PENALTY)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroShotRow {
    pub size: usize,
    pub target: usize,
    pub nearest_neighbor: f64,
    /// Minimum residual over the dataset, by enumeration.
    pub brute_force: f64,
    pub net: f64,
    pub net_clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroShotResults {
    pub targets: Vec<Target>,
    pub rows: Vec<ZeroShotRow>,
    pub curves: Vec<Curve>,
}

impl ZeroShotResults {
    pub fn curve(&self, method: &str, size: usize) -> Option<&Curve> {
        self.curves.iter().find(|c| c.method == method && c.size == size)
    }

    /// `zero_shot.csv` (per target) and `cdf.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, WorkbenchError> {
        ensure_dir(dir)?;
        let mut rows =
            vec![["size", "target", "nearest_neighbor", "brute_force", "net", "net_clamped"].map(String::from).to_vec()];
        for r in &self.rows {
            rows.push(vec![
                r.size.to_string(),
                r.target.to_string(),
                r.nearest_neighbor.to_string(),
                r.brute_force.to_string(),
                r.net.to_string(),
                u8::from(r.net_clamped).to_string(),
            ]);
        }
        let files = [dir.join("zero_shot.csv"), dir.join("cdf.csv")];
        write_csv(&files[0], &rows)?;
        write_curves(&files[1], &self.curves)?;
        Ok(files.to_vec())
    }
}

/// Nearest-neighbor and zero-shot net residuals on `n_targets` reachable
/// targets for each dataset size. Datasets are the first `size` successes of
/// `store`, or freshly generated when no store is given.
#[allow(clippy::too_many_arguments)]
pub fn run_zero_shot_eval(
    sizes: &[usize],
    n_targets: usize,
    seed: u64,
    store: Option<&ObservationStore>,
    hyper: &NetHyper,
    bounds: &Bounds,
    oracle: &OracleSpec,
) -> Result<ZeroShotResults, WorkbenchError> {
    let targets = reachable_targets(n_targets, mix_seed(seed, 1), bounds, oracle)?;
    let exact = oracle.exact();
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for &size in sizes {
        let (d, _) = dataset_of_size(size, mix_seed(seed, 100 + size as u64), store, bounds, oracle)?;
        let net = train_inverse_net(&d, bounds, &NetHyper { seed: mix_seed(hyper.seed, size as u64), ..hyper.clone() })?;
        let (mut nn, mut nr) = (Vec::new(), Vec::new());
        for (j, t) in targets.iter().enumerate() {
            let (_, r_nn) = nearest_neighbor(&d, &t.stiffness)?;
            let brute = d
                .records()
                .iter()
                .map(|r| residual(&r.stiffness, &t.stiffness).unwrap_or(f64::INFINITY))
                .fold(f64::INFINITY, f64::min);
            let p = zero_shot_net(&net, &t.stiffness, bounds);
            let r_net = oracle_residual(&exact, &p.config, &t.stiffness);
            rows.push(ZeroShotRow { size, target: j, nearest_neighbor: r_nn, brute_force: brute, net: r_net, net_clamped: p.clamped });
            nn.push(r_nn);
            nr.push(r_net);
        }
        curves.push(Curve::new("nearest-neighbor", size, None, nn));
        curves.push(Curve::new("zero-shot-net", size, None, nr));
    }
    Ok(ZeroShotResults { targets, rows, curves })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementalRow {
    pub method: String,
    pub init_size: usize,
    /// `None` for the zero-shot reference.
    pub budget: Option<usize>,
    pub instance: usize,
    pub residual: f64,
    /// New oracle evaluations within the budget.
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementalResults {
    pub targets: Vec<Target>,
    pub rows: Vec<IncrementalRow>,
    pub curves: Vec<Curve>,
}

impl IncrementalResults {
    pub fn curve(&self, method: &str, size: usize, budget: Option<usize>) -> Option<&Curve> {
        self.curves.iter().find(|c| c.method == method && c.size == size && c.budget == budget)
    }

    /// `incremental.csv` (per instance) and `cdf.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, WorkbenchError> {
        ensure_dir(dir)?;
        let mut rows =
            vec![["method", "init_size", "budget", "instance", "residual", "evaluations"].map(String::from).to_vec()];
        for r in &self.rows {
            rows.push(vec![
                r.method.clone(),
                r.init_size.to_string(),
                r.budget.map(|b| b.to_string()).unwrap_or_default(),
                r.instance.to_string(),
                r.residual.to_string(),
                r.evaluations.to_string(),
            ]);
        }
        let files = [dir.join("incremental.csv"), dir.join("cdf.csv")];
        write_csv(&files[0], &rows)?;
        write_curves(&files[1], &self.curves)?;
        Ok(files.to_vec())
    }
}

/// Best value after the first `b` entries of a running-minimum trace.
fn best_within(trace: &[f64], b: usize, before: f64) -> f64 {
    trace.iter().take(b).copied().fold(before, f64::min)
}

/// The optimizer (warm started from the initial data) and the incremental
/// net (trained on it) against nearest-neighbor lookup in the same data.
///
/// Both iterative methods run once with the largest budget. Neither looks at
/// its budget before stopping, so the best value within the first `b`
/// evaluations equals the result of a run with budget `b`.
#[allow(clippy::too_many_arguments)]
pub fn run_incremental_eval(
    init_sizes: &[usize],
    budgets: &[usize],
    n_instances: usize,
    seed: u64,
    opts: &IncrementalOptions,
    settings: &Settings,
    bounds: &Bounds,
    oracle: &OracleSpec,
) -> Result<IncrementalResults, WorkbenchError> {
    let max_budget = budgets.iter().copied().max().ok_or_else(|| WorkbenchError::Spec("no budgets".into()))?;
    if budgets.contains(&0) {
        return Err(WorkbenchError::Spec("budgets must be positive".into()));
    }
    let targets = reachable_targets(n_instances, mix_seed(seed, 2), bounds, oracle)?;
    let exact = oracle.exact();
    let mut rows = Vec::new();
    for &size in init_sizes {
        let (d, store) = dataset_of_size(size, mix_seed(seed, 200 + size as u64), None, bounds, oracle)?;
        let hyper = NetHyper { seed: mix_seed(opts.hyper.seed, size as u64), ..opts.hyper.clone() };
        let net = train_inverse_net(&d, bounds, &hyper)?;
        for (j, t) in targets.iter().enumerate() {
            let (_, r_nn) = nearest_neighbor(&d, &t.stiffness)?;
            rows.push(IncrementalRow {
                method: "nearest-neighbor".into(),
                init_size: size,
                budget: None,
                instance: j,
                residual: r_nn,
                evaluations: 0,
            });

            let objective = StiffnessObjective::new(bounds.clone(), t.stiffness, exact);
            let warm = store.warm_start(&t.stiffness);
            let stop = StopRule { max_evaluations: max_budget, ..StopRule::default() };
            let rep = minimize(&objective, &stop, &warm, settings, mix_seed(seed, (size * 1000 + j) as u64))?;
            let warm_best = rep.warm_best.unwrap_or(f64::INFINITY);

            let inc_opts = IncrementalOptions { seed: mix_seed(opts.seed, (size * 1000 + j) as u64), ..opts.clone() };
            let inc = incremental_from(net.clone(), &d, bounds, &t.stiffness, &exact, max_budget, 0.0, &inc_opts)?;

            for &b in budgets {
                rows.push(IncrementalRow {
                    method: "optimizer".into(),
                    init_size: size,
                    budget: Some(b),
                    instance: j,
                    residual: best_within(&rep.trace, b, warm_best),
                    evaluations: rep.trace.len().min(b),
                });
                rows.push(IncrementalRow {
                    method: "incremental-net".into(),
                    init_size: size,
                    budget: Some(b),
                    instance: j,
                    residual: best_within(&inc.trace, b, f64::INFINITY),
                    evaluations: inc.trace.len().min(b),
                });
            }
        }
    }
    let mut curves = Vec::new();
    for &size in init_sizes {
        let pick = |m: &str, b: Option<usize>| {
            rows.iter().filter(|r| r.method == m && r.init_size == size && r.budget == b).map(|r| r.residual).collect()
        };
        curves.push(Curve::new("nearest-neighbor", size, None, pick("nearest-neighbor", None)));
        for &b in budgets {
            curves.push(Curve::new("optimizer", size, Some(b), pick("optimizer", Some(b))));
            curves.push(Curve::new("incremental-net", size, Some(b), pick("incremental-net", Some(b))));
        }
    }
    Ok(IncrementalResults { targets, rows, curves })
}

#[derive(Debug, Clone)]
pub struct MilestoneResults {
    pub target: Target,
    pub milestone: MilestoneReport,
}

/// Milestone protocol against the coarse noisy oracle, with exact
/// measurements from the refined one.
#[allow(clippy::too_many_arguments)]
pub fn run_milestone_experiment(
    target: &JointConfig,
    sims_per_real: usize,
    max_reals: usize,
    threshold: f64,
    seed: u64,
    settings: &Settings,
    bounds: &Bounds,
    oracle: &OracleSpec,
) -> Result<MilestoneResults, WorkbenchError> {
    let target = target_of(target, oracle)?;
    let noisy = StiffnessObjective::new(bounds.clone(), target.stiffness, oracle.noisy(seed));
    let exact = StiffnessObjective::new(bounds.clone(), target.stiffness, oracle.exact());
    let milestone = run_milestone(&noisy, &exact, sims_per_real, max_reals, threshold, &[], settings, seed)?;
    Ok(MilestoneResults { target, milestone })
}

impl MilestoneResults {
    /// `milestones.csv` (one row per exact measurement) and `timing.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, WorkbenchError> {
        ensure_dir(dir)?;
        let mut header: Vec<String> = ["milestone", "simulations", "reals"].map(String::from).to_vec();
        header.extend(VARIABLE_NAMES.iter().map(|s| s.to_string()));
        header.extend(prefixed("sim_", &K_NAMES));
        header.push("sim_residual".into());
        header.extend(prefixed("real_", &K_NAMES));
        header.push("real_residual".into());
        let mut rows = vec![header];
        for m in &self.milestone.log {
            let mut row = vec![m.milestone.to_string(), m.simulations.to_string(), m.reals.to_string()];
            row.extend(m.x.iter().map(|v| v.to_string()));
            row.extend(stiffness_cells(m.simulated.as_ref()));
            row.push(cell(m.simulated_residual));
            row.extend(stiffness_cells(m.real.as_ref()));
            row.push(cell(m.real_residual));
            rows.push(row);
        }
        let files = [dir.join("milestones.csv"), dir.join("timing.csv")];
        write_csv(&files[0], &rows)?;
        write_csv(
            &files[1],
            &[vec!["wall_time_s".to_string()], vec![format!("{:.3}", self.milestone.report.wall_time)]],
        )?;
        Ok(files.to_vec())
    }
}

/// A simulation-only run followed by a single exact check of its answer.
#[derive(Debug, Clone)]
pub struct SingleShot {
    pub target: Target,
    pub x: JointConfig,
    pub simulated: Option<StiffnessTriple>,
    pub simulated_residual: Option<f64>,
    pub real: Option<StiffnessTriple>,
    pub real_residual: Option<f64>,
    pub report: RunReport,
}

pub fn run_single_shot(
    target: &JointConfig,
    simulations: usize,
    seed: u64,
    settings: &Settings,
    bounds: &Bounds,
    oracle: &OracleSpec,
) -> Result<SingleShot, WorkbenchError> {
    let target = target_of(target, oracle)?;
    let noisy = StiffnessObjective::new(bounds.clone(), target.stiffness, oracle.noisy(seed));
    let stop = StopRule { max_evaluations: simulations, objective_threshold: 0.0, stagnation: None };
    let report = minimize(&noisy, &stop, &[], settings, seed)?;
    let x = JointConfig::from_slice(report.best_x.as_deref().unwrap_or(&report.evaluations[0].x));
    let real = oracle.exact().evaluate(&x, 0).ok();
    Ok(SingleShot {
        target,
        x,
        simulated: report.best_response,
        simulated_residual: report.best_value,
        real,
        real_residual: real.and_then(|k| residual(&k, &target.stiffness).ok()),
        report,
    })
}

impl SingleShot {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, WorkbenchError> {
        ensure_dir(dir)?;
        let mut header: Vec<String> = vec!["simulations".into()];
        header.extend(VARIABLE_NAMES.iter().map(|s| s.to_string()));
        header.extend(prefixed("sim_", &K_NAMES));
        header.push("sim_residual".into());
        header.extend(prefixed("real_", &K_NAMES));
        header.push("real_residual".into());
        let mut row = vec![self.report.evaluations().to_string()];
        row.extend(config_cells(&self.x));
        row.extend(stiffness_cells(self.simulated.as_ref()));
        row.push(cell(self.simulated_residual));
        row.extend(stiffness_cells(self.real.as_ref()));
        row.push(cell(self.real_residual));
        let path = dir.join("single_shot.csv");
        write_csv(&path, &[header, row])?;
        Ok(vec![path])
    }
}
