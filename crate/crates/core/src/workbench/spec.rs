use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{IncrementalOptions, NetHyper};
use crate::joint::{default_bounds, JointConfig};
use crate::optimizer::{Settings, StopRule};
use crate::oracle::{
    BeamOracle, Fidelity, Material, NoisyBeamOracle, StiffnessOracle, DEFAULT_NOISE_CAP, EXACT_MESH_DENSITY,
    NOISY_MESH_DENSITY,
};
use crate::space::{Bounds, VarBounds};

use super::experiments::{
    generate_dataset, reachable_targets, run_incremental_eval, run_milestone_experiment, run_recovery_benchmark,
    run_single_shot, run_zero_shot_eval,
};
use super::reachability::{export_reachability, write_reachability, GridSpec};
use super::store::ObservationStore;
use super::{ensure_dir, WorkbenchError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityKind {
    #[default]
    Exact,
    Noisy,
}

/// How to build the exact and noisy oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSpec {
    pub material: Material,
    pub exact_mesh_density: usize,
    pub noisy_mesh_density: usize,
    pub noise_cap: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            material: Material::default(),
            exact_mesh_density: EXACT_MESH_DENSITY,
            noisy_mesh_density: NOISY_MESH_DENSITY,
            noise_cap: DEFAULT_NOISE_CAP,
        }
    }
}

impl OracleSpec {
    pub fn exact(&self) -> BeamOracle {
        BeamOracle { material: self.material, mesh_density: self.exact_mesh_density }
    }

    pub fn noisy(&self, seed: u64) -> NoisyBeamOracle {
        NoisyBeamOracle {
            material: self.material,
            mesh_density: self.noisy_mesh_density,
            ..NoisyBeamOracle::new(self.noise_cap, seed)
        }
    }

    pub fn build(&self, kind: FidelityKind, seed: u64) -> Box<dyn StiffnessOracle> {
        match kind {
            FidelityKind::Exact => Box::new(self.exact()),
            FidelityKind::Noisy => Box::new(self.noisy(seed)),
        }
    }

    pub fn fidelity(&self, kind: FidelityKind) -> Fidelity {
        match kind {
            FidelityKind::Exact => Fidelity::Exact,
            FidelityKind::Noisy => Fidelity::Noisy { cap: self.noise_cap },
        }
    }

    fn validate(&self) -> Result<(), WorkbenchError> {
        if !(0.0..1.0).contains(&self.noise_cap) {
            return Err(WorkbenchError::Spec(format!("noise cap {} must lie in [0, 1)", self.noise_cap)));
        }
        if !self.material.is_valid() {
            return Err(WorkbenchError::Spec("invalid material".into()));
        }
        Ok(())
    }
}

/// Override `name → [lower, upper]` on top of the default joint box. An
/// integral variable stays integral.
pub fn apply_bounds_overrides(overrides: &BTreeMap<String, [f64; 2]>) -> Result<Bounds, WorkbenchError> {
    let mut b = default_bounds();
    for (name, [lo, hi]) in overrides {
        let integer = b
            .vars()
            .iter()
            .find(|v| &v.name == name)
            .ok_or_else(|| WorkbenchError::Spec(format!("unknown variable `{name}` in bounds")))?
            .integer;
        b = b.with_override(&VarBounds { name: name.clone(), lower: *lo, upper: *hi, integer })?;
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GenData,
    Recover,
    ZeroShot,
    Incremental,
    Milestone,
    Heatmap,
}

fn d_n_targets() -> usize {
    5
}
fn d_budget() -> usize {
    200
}
fn d_count() -> usize {
    200
}
fn d_sizes() -> Vec<usize> {
    vec![1000, 2000]
}
fn d_init_sizes() -> Vec<usize> {
    vec![25, 50, 100, 200]
}
fn d_budgets() -> Vec<usize> {
    vec![5, 10, 20]
}
fn d_zero_shot_targets() -> usize {
    25
}
fn d_instances() -> usize {
    15
}
fn d_sims() -> usize {
    25
}
fn d_reals() -> usize {
    10
}
fn d_threshold() -> f64 {
    1e-3
}

/// Everything needed to rerun one experiment. Missing fields take the
/// defaults of the corresponding study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default)]
    pub bounds: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub oracle: OracleSpec,
    /// Oracle used by `gen-data`.
    #[serde(default)]
    pub fidelity: FidelityKind,
    /// Existing store: warm start for `recover`, data pool for `zero-shot`,
    /// stiffness set for `heatmap`. Output location for `gen-data`.
    #[serde(default)]
    pub store: Option<PathBuf>,
    /// Explicit target configs; random reachable ones when empty.
    #[serde(default)]
    pub targets: Vec<JointConfig>,
    #[serde(default = "d_n_targets")]
    pub n_targets: usize,
    #[serde(default = "d_budget")]
    pub budget: usize,
    /// Records produced by `gen-data`.
    #[serde(default = "d_count")]
    pub count: usize,
    #[serde(default = "d_sizes")]
    pub dataset_sizes: Vec<usize>,
    #[serde(default = "d_zero_shot_targets")]
    pub zero_shot_targets: usize,
    #[serde(default = "d_init_sizes")]
    pub init_sizes: Vec<usize>,
    #[serde(default = "d_budgets")]
    pub budgets: Vec<usize>,
    #[serde(default = "d_instances")]
    pub n_instances: usize,
    #[serde(default = "d_sims")]
    pub sims_per_real: usize,
    #[serde(default = "d_reals")]
    pub max_reals: usize,
    #[serde(default = "d_threshold")]
    pub threshold: f64,
    /// Milestone variant: this many simulations, then one exact check.
    #[serde(default)]
    pub single_shot: Option<usize>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub settings: Settings,
    #[serde(default)]
    pub net: NetHyper,
    #[serde(default)]
    pub incremental: IncrementalOptions,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "kind": kind, "seed": seed })).expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self, WorkbenchError> {
        serde_json::from_str(text).map_err(|e| WorkbenchError::Spec(e.to_string()))
    }

    pub fn bounds(&self) -> Result<Bounds, WorkbenchError> {
        apply_bounds_overrides(&self.bounds)
    }

    /// Check that referenced files exist and parameters are usable.
    pub fn validate(&self) -> Result<(), WorkbenchError> {
        self.oracle.validate()?;
        self.bounds()?;
        let needs_store = matches!(self.kind, ExperimentKind::Heatmap);
        match (&self.store, self.kind) {
            (Some(p), k) if k != ExperimentKind::GenData && !p.exists() => {
                return Err(WorkbenchError::MissingFile(p.clone()));
            }
            (None, _) if needs_store => return Err(WorkbenchError::Spec("heatmap needs a store".into())),
            _ => {}
        }
        let positive = [
            ("budget", self.budget),
            ("count", self.count),
            ("n_targets", self.n_targets),
            ("sims_per_real", self.sims_per_real),
            ("max_reals", self.max_reals),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(WorkbenchError::Spec(format!("{name} must be positive")));
        }
        Ok(())
    }

    fn targets(&self, bounds: &Bounds) -> Result<Vec<JointConfig>, WorkbenchError> {
        if !self.targets.is_empty() {
            return Ok(self.targets.clone());
        }
        Ok(reachable_targets(self.n_targets, self.seed, bounds, &self.oracle)?.into_iter().map(|t| t.config).collect())
    }

    fn open_store(&self) -> Result<Option<ObservationStore>, WorkbenchError> {
        self.store.as_deref().map(ObservationStore::open).transpose()
    }
}

/// Run `spec`, writing its data files (and a copy of the spec) into `out`.
/// Returns the written paths.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path) -> Result<Vec<PathBuf>, WorkbenchError> {
    spec.validate()?;
    ensure_dir(out)?;
    let bounds = spec.bounds()?;
    let mut files = match spec.kind {
        ExperimentKind::GenData => {
            let path = spec.store.clone().unwrap_or_else(|| out.join("observations.csv"));
            generate_dataset(spec.count, spec.seed, spec.fidelity, &spec.oracle, &bounds, Some(&path))?;
            vec![path]
        }
        ExperimentKind::Recover => {
            let warm = spec.open_store()?;
            let stop = StopRule::budget(spec.budget);
            let targets = spec.targets(&bounds)?;
            run_recovery_benchmark(&targets, warm.as_ref(), &stop, spec.seed, &spec.settings, &bounds, &spec.oracle)?
                .write(out)?
        }
        ExperimentKind::ZeroShot => {
            let store = spec.open_store()?;
            let net = NetHyper { seed: spec.seed, ..spec.net.clone() };
            run_zero_shot_eval(&spec.dataset_sizes, spec.zero_shot_targets, spec.seed, store.as_ref(), &net, &bounds, &spec.oracle)?
                .write(out)?
        }
        ExperimentKind::Incremental => run_incremental_eval(
            &spec.init_sizes,
            &spec.budgets,
            spec.n_instances,
            spec.seed,
            &spec.incremental,
            &spec.settings,
            &bounds,
            &spec.oracle,
        )?
        .write(out)?,
        ExperimentKind::Milestone => {
            let target = spec.targets(&bounds)?[0];
            match spec.single_shot {
                Some(n) => run_single_shot(&target, n, spec.seed, &spec.settings, &bounds, &spec.oracle)?.write(out)?,
                None => run_milestone_experiment(
                    &target,
                    spec.sims_per_real,
                    spec.max_reals,
                    spec.threshold,
                    spec.seed,
                    &spec.settings,
                    &bounds,
                    &spec.oracle,
                )?
                .write(out)?,
            }
        }
        ExperimentKind::Heatmap => {
            let store = spec.open_store()?.expect("validated");
            let ks: Vec<_> = store.dataset(None).records().iter().map(|r| r.stiffness).collect();
            write_reachability(&export_reachability(&ks, &spec.grid)?, out)?
        }
    };
    let spec_path = out.join("spec.json");
    let text = serde_json::to_string_pretty(spec).expect("spec serializes") + "\n";
    fs::write(&spec_path, text).map_err(|source| WorkbenchError::Io { path: spec_path.clone(), source })?;
    files.push(spec_path);
    Ok(files)
}
