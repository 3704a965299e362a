//! Stiffness oracles: a frame-element model of the wave wall at two mesh
//! resolutions, a multiplicative-noise wrapper standing in for a cheap
//! simulator, and the relative residual used as the design objective.

#[cfg(test)]
mod band;
mod frame;
pub mod synthetic;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::joint::JointConfig;

pub use frame::{BLOCK_LENGTH, CONDITION_LIMIT, WALL_DEPTH};

/// Elements per ridge used by the exact oracle.
pub const EXACT_MESH_DENSITY: usize = 32;
/// Elements per ridge used by the noisy oracle.
pub const NOISY_MESH_DENSITY: usize = 8;
/// Default relative noise cap of cheap observations.
pub const DEFAULT_NOISE_CAP: f64 = 0.30;

/// `(k_xi, k_eta, k_zeta)`: bending stiffnesses in N/mm under a 1 N tip load
/// along the extrusion and through the wall, and torsional stiffness in
/// N·mm/deg under a 1 N·mm couple about the joint axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessTriple {
    pub k_xi: f64,
    pub k_eta: f64,
    pub k_zeta: f64,
}

impl StiffnessTriple {
    pub const fn new(k_xi: f64, k_eta: f64, k_zeta: f64) -> Self {
        StiffnessTriple { k_xi, k_eta, k_zeta }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        StiffnessTriple::new(a[0], a[1], a[2])
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k_xi, self.k_eta, self.k_zeta]
    }

    pub fn scale(&self, s: f64) -> Self {
        StiffnessTriple::new(self.k_xi * s, self.k_eta * s, self.k_zeta * s)
    }
}

impl fmt::Display for StiffnessTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4}, {:.4})", self.k_xi, self.k_eta, self.k_zeta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// GPa
    pub young_modulus: f64,
    /// g/cm³; statics do not use it
    pub density: f64,
    pub poisson_ratio: f64,
}

impl Default for Material {
    /// ABS.
    fn default() -> Self {
        Material { young_modulus: 2.30, density: 1.06, poisson_ratio: 0.35 }
    }
}

impl Material {
    pub fn with_young_modulus(mut self, gpa: f64) -> Self {
        self.young_modulus = gpa;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.young_modulus > 0.0 && (0.0..0.5).contains(&self.poisson_ratio)
    }

    pub(crate) fn young_modulus_mpa(&self) -> f64 {
        self.young_modulus * 1000.0
    }

    pub(crate) fn shear_modulus_mpa(&self) -> f64 {
        self.young_modulus_mpa() / (2.0 * (1.0 + self.poisson_ratio))
    }
}

/// Trust level of an observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fidelity {
    Exact,
    /// Relative error of the observation is at most `cap`.
    Noisy { cap: f64 },
}

impl Fidelity {
    pub fn noisy(cap: f64) -> Self {
        assert!((0.0..1.0).contains(&cap), "noise cap must lie in [0, 1)");
        Fidelity::Noisy { cap }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Fidelity::Exact)
    }

    pub fn noise_cap(&self) -> f64 {
        match self {
            Fidelity::Exact => 0.0,
            Fidelity::Noisy { cap } => *cap,
        }
    }
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fidelity::Exact => f.write_str("exact"),
            Fidelity::Noisy { cap } => write!(f, "noisy:{cap}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("unrecognized fidelity `{0}` (expected `exact` or `noisy:<cap>`)")]
pub struct ParseFidelityError(String);

impl FromStr for Fidelity {
    type Err = ParseFidelityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Fidelity::Exact),
            "noisy" => Ok(Fidelity::Noisy { cap: DEFAULT_NOISE_CAP }),
            _ => {
                let cap = s
                    .strip_prefix("noisy:")
                    .and_then(|c| c.parse::<f64>().ok())
                    .filter(|c| (0.0..1.0).contains(c))
                    .ok_or_else(|| ParseFidelityError(s.to_string()))?;
                Ok(Fidelity::Noisy { cap })
            }
        }
    }
}

impl Serialize for Fidelity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fidelity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Why an evaluation produced no stiffness.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum FailureReason {
    #[error("stiffness matrix is singular or ill-conditioned (condition ≈ {condition:e})")]
    SingularSystem { condition: f64 },
    #[error("computed stiffness is not positive")]
    NonPositiveStiffness,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid material")]
    InvalidMaterial,
    #[error("mesh density {0} is below 2")]
    MeshTooCoarse(usize),
    #[error("{0}")]
    Injected(String),
}

pub type OracleOutcome = Result<StiffnessTriple, FailureReason>;

/// Stiffness of `cfg` from the frame model with `mesh_density` elements per ridge.
///
/// Configurations outside the optimization box are accepted; only geometry
/// that cannot be meshed (non-positive amplitude, length, ridge count or
/// thickness) fails.
pub fn evaluate_stiffness(cfg: &JointConfig, material: &Material, mesh_density: usize) -> OracleOutcome {
    if mesh_density < 2 {
        return Err(FailureReason::MeshTooCoarse(mesh_density));
    }
    if !material.is_valid() {
        return Err(FailureReason::InvalidMaterial);
    }
    let finite = cfg.to_array().iter().all(|v| v.is_finite());
    if !finite || !(cfg.l_t > 0.0 && cfg.n_r >= 1.0 && cfg.t_h > 0.0) {
        return Err(FailureReason::InvalidGeometry(format!("{cfg}")));
    }
    if !(cfg.amplitude() > 0.0) {
        return Err(FailureReason::InvalidGeometry("wave amplitude h_t/2 - t_h is not positive".into()));
    }
    frame::solve(cfg, material, mesh_density)
}

/// Coarse-mesh evaluation with each component scaled by an independent factor
/// drawn uniformly from `[1 - level, 1 + level]`. Deterministic in `seed`.
pub fn noisy_evaluate(cfg: &JointConfig, material: &Material, mesh_density: usize, level: f64, seed: u64) -> OracleOutcome {
    assert!((0.0..1.0).contains(&level), "noise level must lie in [0, 1)");
    let k = evaluate_stiffness(cfg, material, mesh_density)?;
    if level == 0.0 {
        return Ok(k);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = || rng.gen_range(1.0 - level..=1.0 + level);
    Ok(StiffnessTriple::new(k.k_xi * f(), k.k_eta * f(), k.k_zeta * f()))
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("target component {0} is zero")]
pub struct ZeroTarget(pub usize);

/// Squared norm of componentwise relative errors, `Σ ((k_i − T_i) / T_i)²`.
pub fn residual(k: &StiffnessTriple, target: &StiffnessTriple) -> Result<f64, ZeroTarget> {
    let mut sum = 0.0;
    for (i, (ki, ti)) in k.as_array().into_iter().zip(target.as_array()).enumerate() {
        if ti == 0.0 {
            return Err(ZeroTarget(i));
        }
        let r = (ki - ti) / ti;
        sum += r * r;
    }
    Ok(sum)
}

/// A source of stiffness measurements.
///
/// `nonce` distinguishes repeated calls; noisy oracles mix it into their seed
/// so that a fixed sequence of calls is reproducible.
pub trait StiffnessOracle: Send + Sync {
    fn fidelity(&self) -> Fidelity;
    fn evaluate(&self, cfg: &JointConfig, nonce: u64) -> OracleOutcome;
}

impl<T: StiffnessOracle + ?Sized> StiffnessOracle for &T {
    fn fidelity(&self) -> Fidelity {
        (**self).fidelity()
    }

    fn evaluate(&self, cfg: &JointConfig, nonce: u64) -> OracleOutcome {
        (**self).evaluate(cfg, nonce)
    }
}

impl<T: StiffnessOracle + ?Sized> StiffnessOracle for Box<T> {
    fn fidelity(&self) -> Fidelity {
        (**self).fidelity()
    }

    fn evaluate(&self, cfg: &JointConfig, nonce: u64) -> OracleOutcome {
        (**self).evaluate(cfg, nonce)
    }
}

/// Refined-mesh frame model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamOracle {
    pub material: Material,
    pub mesh_density: usize,
}

impl Default for BeamOracle {
    fn default() -> Self {
        BeamOracle { material: Material::default(), mesh_density: EXACT_MESH_DENSITY }
    }
}

impl StiffnessOracle for BeamOracle {
    fn fidelity(&self) -> Fidelity {
        Fidelity::Exact
    }

    fn evaluate(&self, cfg: &JointConfig, _nonce: u64) -> OracleOutcome {
        evaluate_stiffness(cfg, &self.material, self.mesh_density)
    }
}

/// Coarse-mesh frame model with bounded multiplicative noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyBeamOracle {
    pub material: Material,
    pub mesh_density: usize,
    /// Cap reported to the optimizer.
    pub cap: f64,
    /// Actual noise amplitude, at most `cap`.
    pub level: f64,
    pub seed: u64,
}

impl NoisyBeamOracle {
    pub fn new(cap: f64, seed: u64) -> Self {
        NoisyBeamOracle { material: Material::default(), mesh_density: NOISY_MESH_DENSITY, cap, level: cap, seed }
    }
}

pub(crate) fn mix_seed(seed: u64, nonce: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ nonce.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StiffnessOracle for NoisyBeamOracle {
    fn fidelity(&self) -> Fidelity {
        Fidelity::Noisy { cap: self.cap }
    }

    fn evaluate(&self, cfg: &JointConfig, nonce: u64) -> OracleOutcome {
        let level = self.level.min(self.cap);
        noisy_evaluate(cfg, &self.material, self.mesh_density, level, mix_seed(self.seed, nonce))
    }
}

/// Wraps an oracle and fails inside a region of the design space.
pub struct FailingRegion<O, F> {
    pub inner: O,
    pub fails: F,
}

impl<O, F> StiffnessOracle for FailingRegion<O, F>
where
    O: StiffnessOracle,
    F: Fn(&JointConfig) -> bool + Send + Sync,
{
    fn fidelity(&self) -> Fidelity {
        self.inner.fidelity()
    }

    fn evaluate(&self, cfg: &JointConfig, nonce: u64) -> OracleOutcome {
        if (self.fails)(cfg) {
            Err(FailureReason::Injected(format!("configured failure at {cfg}")))
        } else {
            self.inner.evaluate(cfg, nonce)
        }
    }
}
