//! Command-line front end over `wavejoint::workbench`.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use wavejoint::joint::{validate_config, JointConfig};
use wavejoint::oracle::StiffnessOracle;
use wavejoint::workbench::{
    apply_bounds_overrides, run_experiment, ExperimentKind, ExperimentSpec, FidelityKind, WorkbenchError,
};

#[derive(Parser)]
#[command(name = "wavejoint", version, about = "Inverse stiffness design of wave joints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fid {
    Exact,
    Noisy,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bound overrides as JSON, e.g. '{"alpha":[0,12]}', or a path to such a file
    #[arg(long)]
    bounds: Option<String>,
    /// Evaluation budget (recover: per target; incremental: largest budget; milestone: total simulations)
    #[arg(long)]
    budget: Option<usize>,
    /// Observation store (CSV with a .json sidecar)
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    fidelity: Fid,
    #[arg(long, default_value_t = 0.30)]
    noise_cap: f64,
    /// Full experiment spec as JSON; command-line flags override it
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate Latin-hypercube configs into a store
    GenData {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Recover self-consistent targets with the optimizer
    Recover {
        #[command(flatten)]
        common: Common,
        /// Target configs as a JSON list of objects with l_t, n_r, h_t, t_h, alpha
        #[arg(long)]
        targets: Option<String>,
        #[arg(long)]
        n_targets: Option<usize>,
    },
    /// Nearest-neighbor and inverse-net residual distributions
    ZeroShot {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        n_targets: Option<usize>,
    },
    /// Optimizer vs incremental net from small initial datasets
    Incremental {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        init_sizes: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<usize>>,
        #[arg(long)]
        instances: Option<usize>,
    },
    /// Noisy simulations with periodic exact measurements
    Milestone {
        #[command(flatten)]
        common: Common,
        /// Target config as a JSON object
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        sims_per_real: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        /// Run this many simulations, then a single exact check
        #[arg(long)]
        single_shot: Option<usize>,
    },
    /// Inverse distance to the nearest stored stiffness over a grid
    Heatmap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Stiffness of a single config
    OracleEval {
        #[command(flatten)]
        common: Common,
        /// l_t,n_r,h_t,t_h,alpha
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        config: Vec<f64>,
    },
}

fn spec_error(msg: impl Into<String>) -> WorkbenchError {
    WorkbenchError::Spec(msg.into())
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, WorkbenchError> {
    serde_json::from_str(text).map_err(|e| spec_error(format!("{what}: {e}")))
}

fn base_spec(kind: ExperimentKind, c: &Common) -> Result<ExperimentSpec, WorkbenchError> {
    let mut spec = match &c.spec {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| WorkbenchError::Io { path: p.clone(), source })?;
            let mut s = ExperimentSpec::from_json(&text)?;
            s.kind = kind;
            s
        }
        None => ExperimentSpec::new(kind, c.seed),
    };
    if c.spec.is_none() || c.seed != 0 {
        spec.seed = c.seed;
    }
    if let Some(b) = &c.bounds {
        let text = if b.trim_start().starts_with('{') {
            b.clone()
        } else {
            fs::read_to_string(b).map_err(|source| WorkbenchError::Io { path: b.into(), source })?
        };
        spec.bounds = parse_json::<BTreeMap<String, [f64; 2]>>("--bounds", &text)?;
    }
    if c.store.is_some() {
        spec.store = c.store.clone();
    }
    spec.fidelity = match c.fidelity {
        Fid::Exact => FidelityKind::Exact,
        Fid::Noisy => FidelityKind::Noisy,
    };
    spec.oracle.noise_cap = c.noise_cap;
    Ok(spec)
}

fn run(cli: Cli) -> Result<serde_json::Value, WorkbenchError> {
    let (spec, out) = match cli.command {
        Command::GenData { common, count } => {
            let mut s = base_spec(ExperimentKind::GenData, &common)?;
            if let Some(n) = count.or(common.budget) {
                s.count = n;
            }
            (s, common.out)
        }
        Command::Recover { common, targets, n_targets } => {
            let mut s = base_spec(ExperimentKind::Recover, &common)?;
            if let Some(t) = targets {
                s.targets = parse_json("--targets", &t)?;
            }
            if let Some(n) = n_targets {
                s.n_targets = n;
            }
            if let Some(b) = common.budget {
                s.budget = b;
            }
            (s, common.out)
        }
        Command::ZeroShot { common, sizes, n_targets } => {
            let mut s = base_spec(ExperimentKind::ZeroShot, &common)?;
            if let Some(v) = sizes {
                s.dataset_sizes = v;
            }
            if let Some(n) = n_targets {
                s.zero_shot_targets = n;
            }
            (s, common.out)
        }
        Command::Incremental { common, init_sizes, budgets, instances } => {
            let mut s = base_spec(ExperimentKind::Incremental, &common)?;
            if let Some(v) = init_sizes {
                s.init_sizes = v;
            }
            if let Some(v) = budgets {
                s.budgets = v;
            } else if let Some(b) = common.budget {
                s.budgets = vec![b];
            }
            if let Some(n) = instances {
                s.n_instances = n;
            }
            (s, common.out)
        }
        Command::Milestone { common, target, sims_per_real, threshold, single_shot } => {
            let mut s = base_spec(ExperimentKind::Milestone, &common)?;
            if let Some(t) = target {
                s.targets = vec![parse_json::<JointConfig>("--target", &t)?];
            }
            if let Some(n) = sims_per_real {
                s.sims_per_real = n;
            }
            if let Some(t) = threshold {
                s.threshold = t;
            }
            if let Some(b) = common.budget {
                s.max_reals = (b / s.sims_per_real.max(1)).max(1);
            }
            s.single_shot = single_shot.or(s.single_shot);
            (s, common.out)
        }
        Command::Heatmap { common, resolution } => {
            let mut s = base_spec(ExperimentKind::Heatmap, &common)?;
            if let Some(r) = resolution {
                s.grid.resolution = r;
            }
            (s, common.out)
        }
        Command::OracleEval { common, config } => {
            if config.len() != 5 {
                return Err(spec_error(format!("--config needs 5 values, got {}", config.len())));
            }
            let spec = base_spec(ExperimentKind::Recover, &common)?;
            let cfg = JointConfig::from_slice(&config);
            let bounds = apply_bounds_overrides(&spec.bounds)?;
            let in_bounds = validate_config(&cfg, &bounds).is_ok();
            let oracle = spec.oracle.build(spec.fidelity, spec.seed);
            return match oracle.evaluate(&cfg, 0) {
                Ok(k) => Ok(json!({
                    "config": cfg,
                    "in_bounds": in_bounds,
                    "fidelity": oracle.fidelity(),
                    "stiffness": k,
                })),
                Err(e) => Err(WorkbenchError::TargetFailed { config: cfg.to_string(), reason: e.to_string() }),
            };
        }
    };
    let files = run_experiment(&spec, &out)?;
    Ok(json!({ "files": files }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = json!({ "error": { "kind": "usage", "message": e.to_string().trim() } });
            eprintln!("{err}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(v) => {
            println!("{}", json!({ "ok": true, "result": v }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": { "kind": e.kind(), "message": e.to_string() } }));
            ExitCode::FAILURE
        }
    }
}
