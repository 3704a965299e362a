//! Append-only CSV store of oracle evaluations with a JSON sidecar.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::baselines::{Dataset, Record};
use crate::joint::{default_bounds, JointConfig};
use crate::optimizer::{warm_observations, Observation};
use crate::oracle::{Fidelity, FailureReason, Material, OracleOutcome, StiffnessTriple, EXACT_MESH_DENSITY, NOISY_MESH_DENSITY};
use crate::space::Bounds;

use super::WorkbenchError;

pub const HEADER: [&str; 11] =
    ["l_t", "n_r", "h_t", "t_h", "alpha", "k_xi", "k_eta", "k_zeta", "fidelity", "failed", "run_id"];

/// One stored evaluation; `stiffness` is `None` for failures.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredObservation {
    pub config: JointConfig,
    pub stiffness: Option<StiffnessTriple>,
    pub fidelity: Fidelity,
    pub run_id: String,
}

impl StoredObservation {
    pub fn from_outcome(config: JointConfig, outcome: &OracleOutcome, fidelity: Fidelity, run_id: &str) -> Self {
        StoredObservation { config, stiffness: outcome.as_ref().ok().copied(), fidelity, run_id: run_id.to_string() }
    }

    pub fn failed(&self) -> bool {
        self.stiffness.is_none()
    }

    pub fn outcome(&self) -> OracleOutcome {
        self.stiffness.ok_or_else(|| FailureReason::Injected("stored failure".into()))
    }

    fn row(&self) -> Vec<String> {
        let mut row: Vec<String> = self.config.to_array().iter().map(|v| v.to_string()).collect();
        match self.stiffness {
            Some(k) => row.extend(k.as_array().iter().map(|v| v.to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), 3)),
        }
        row.push(self.fidelity.to_string());
        row.push(u8::from(self.failed()).to_string());
        row.push(self.run_id.clone());
        row
    }

    fn parse(rec: &csv::StringRecord) -> Result<Self, String> {
        if rec.len() != HEADER.len() {
            return Err(format!("expected {} fields, got {}", HEADER.len(), rec.len()));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| format!("column {}: {e}", HEADER[i]));
        let config = JointConfig::new(num(0)?, num(1)?, num(2)?, num(3)?, num(4)?);
        let failed = match &rec[9] {
            "0" => false,
            "1" => true,
            other => return Err(format!("column failed: `{other}`")),
        };
        let stiffness = if failed { None } else { Some(StiffnessTriple::new(num(5)?, num(6)?, num(7)?)) };
        let fidelity = rec[8].parse().map_err(|e| format!("{e}"))?;
        Ok(StoredObservation { config, stiffness, fidelity, run_id: rec[10].to_string() })
    }
}

/// Sidecar metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub bounds: Bounds,
    pub material: Material,
    pub exact_mesh_density: usize,
    pub noisy_mesh_density: usize,
    pub seed: u64,
    /// Seconds since the Unix epoch at creation.
    pub created: u64,
}

impl StoreMeta {
    pub fn new(seed: u64) -> Self {
        StoreMeta {
            bounds: default_bounds(),
            material: Material::default(),
            exact_mesh_density: EXACT_MESH_DENSITY,
            noisy_mesh_density: NOISY_MESH_DENSITY,
            seed,
            created: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }
}

/// Evaluations in memory, optionally mirrored to `<path>` and `<path>.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationStore {
    path: Option<PathBuf>,
    pub meta: StoreMeta,
    records: Vec<StoredObservation>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> WorkbenchError + '_ {
    move |source| WorkbenchError::Io { path: path.to_path_buf(), source }
}

impl ObservationStore {
    pub fn in_memory(meta: StoreMeta) -> Self {
        ObservationStore { path: None, meta, records: Vec::new() }
    }

    /// Start a new store file (truncating any existing one).
    pub fn create(path: &Path, meta: StoreMeta) -> Result<Self, WorkbenchError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let store = ObservationStore { path: Some(path.to_path_buf()), meta, records: Vec::new() };
        let mut f = File::create(path).map_err(io_err(path))?;
        writeln!(f, "{}", HEADER.join(",")).map_err(io_err(path))?;
        store.write_sidecar()?;
        Ok(store)
    }

    fn write_sidecar(&self) -> Result<(), WorkbenchError> {
        if let Some(p) = &self.path {
            let side = sidecar_path(p);
            let json = serde_json::to_string_pretty(&self.meta).expect("metadata serializes");
            fs::write(&side, json + "\n").map_err(io_err(&side))?;
        }
        Ok(())
    }

    pub fn open(path: &Path) -> Result<Self, WorkbenchError> {
        let side = sidecar_path(path);
        let text = fs::read_to_string(&side).map_err(io_err(&side))?;
        let meta: StoreMeta =
            serde_json::from_str(&text).map_err(|e| WorkbenchError::Format { path: side.clone(), message: e.to_string() })?;
        let file = File::open(path).map_err(io_err(path))?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let fmt = |message: String| WorkbenchError::Format { path: path.to_path_buf(), message };
        let header = reader.headers().map_err(|e| fmt(e.to_string()))?.clone();
        if header.iter().ne(HEADER) {
            return Err(fmt(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
        }
        let mut records = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| fmt(e.to_string()))?;
            records.push(StoredObservation::parse(&rec).map_err(|m| fmt(format!("row {}: {m}", i + 1)))?);
        }
        Ok(ObservationStore { path: Some(path.to_path_buf()), meta, records })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn records(&self) -> &[StoredObservation] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn append(&mut self, obs: StoredObservation) -> Result<(), WorkbenchError> {
        self.extend(std::iter::once(obs))
    }

    pub fn extend<I: IntoIterator<Item = StoredObservation>>(&mut self, items: I) -> Result<(), WorkbenchError> {
        let start = self.records.len();
        self.records.extend(items);
        if let Some(p) = &self.path {
            let f = OpenOptions::new().append(true).open(p).map_err(io_err(p))?;
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(f));
            for r in &self.records[start..] {
                w.write_record(r.row()).map_err(|e| WorkbenchError::Format { path: p.clone(), message: e.to_string() })?;
            }
            w.flush().map_err(io_err(p))?;
        }
        Ok(())
    }

    /// The CSV data section (header plus rows) as written to disk.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for r in &self.records {
            w.write_record(r.row()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }

    /// Successful evaluations, optionally only the first `limit` of them.
    pub fn dataset(&self, limit: Option<usize>) -> Dataset {
        let records = self
            .records
            .iter()
            .filter_map(|r| r.stiffness.map(|stiffness| Record { config: r.config, stiffness, fidelity: r.fidelity }))
            .take(limit.unwrap_or(usize::MAX))
            .collect();
        Dataset::new(records).expect("stored stiffnesses come from the oracle")
    }

    /// Every stored evaluation as an optimizer observation against `target`.
    pub fn warm_start(&self, target: &StiffnessTriple) -> Vec<Observation> {
        let outcomes: Vec<(JointConfig, OracleOutcome, Fidelity)> =
            self.records.iter().map(|r| (r.config, r.outcome(), r.fidelity)).collect();
        warm_observations(outcomes.iter().map(|(c, o, f)| (c, o, *f)), target)
    }
}
