//! Box-bounded mixed-integer search spaces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bounds and integrality of one design variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarBounds {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub integer: bool,
}

impl VarBounds {
    pub fn real(name: &str, lower: f64, upper: f64) -> Self {
        VarBounds { name: name.to_string(), lower, upper, integer: false }
    }

    pub fn integer(name: &str, lower: i64, upper: i64) -> Self {
        VarBounds { name: name.to_string(), lower: lower as f64, upper: upper as f64, integer: true }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Clamp into `[lower, upper]`, then round integral variables half away from zero.
    pub fn project(&self, x: f64) -> f64 {
        let x = if x.is_nan() { self.lower } else { x.clamp(self.lower, self.upper) };
        if self.integer {
            x.round()
        } else {
            x
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper && (!self.integer || x.fract() == 0.0)
    }

    /// Number of integral values inside the bounds (`None` for real variables).
    pub fn cardinality(&self) -> Option<u64> {
        self.integer.then(|| (self.upper - self.lower) as u64 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("bounds for `{0}` have lower > upper")]
    Inverted(String),
    #[error("integral variable `{0}` has non-integral bounds")]
    FractionalIntegerBounds(String),
    #[error("bounds for `{0}` are not finite")]
    NotFinite(String),
    #[error("search space has no variables")]
    Empty,
    #[error("expected {expected} variables, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// A box `[lower, upper]` over named variables, some of them integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<VarBounds>", into = "Vec<VarBounds>")]
pub struct Bounds {
    vars: Vec<VarBounds>,
}

impl TryFrom<Vec<VarBounds>> for Bounds {
    type Error = BoundsError;

    fn try_from(vars: Vec<VarBounds>) -> Result<Self, Self::Error> {
        Bounds::new(vars)
    }
}

impl From<Bounds> for Vec<VarBounds> {
    fn from(b: Bounds) -> Self {
        b.vars
    }
}

impl Bounds {
    pub fn new(vars: Vec<VarBounds>) -> Result<Self, BoundsError> {
        if vars.is_empty() {
            return Err(BoundsError::Empty);
        }
        for v in &vars {
            if !v.lower.is_finite() || !v.upper.is_finite() {
                return Err(BoundsError::NotFinite(v.name.clone()));
            }
            if v.lower > v.upper {
                return Err(BoundsError::Inverted(v.name.clone()));
            }
            if v.integer && (v.lower.fract() != 0.0 || v.upper.fract() != 0.0) {
                return Err(BoundsError::FractionalIntegerBounds(v.name.clone()));
            }
        }
        Ok(Bounds { vars })
    }

    /// `dim` real variables in `[lower, upper]`, named `x0, x1, ...`.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self, BoundsError> {
        Bounds::new((0..dim).map(|i| VarBounds::real(&format!("x{i}"), lower, upper)).collect())
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[VarBounds] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> &VarBounds {
        &self.vars[i]
    }

    pub fn lower(&self) -> Vec<f64> {
        self.vars.iter().map(|v| v.lower).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.vars.iter().map(|v| v.upper).collect()
    }

    pub fn is_integer(&self, i: usize) -> bool {
        self.vars[i].integer
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.vars.iter().zip(x).all(|(v, &xi)| v.contains(xi))
    }

    /// Componentwise clamp-then-round projection onto the feasible set.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.vars.iter().zip(x).map(|(v, &xi)| v.project(xi)).collect()
    }

    /// Number of distinct feasible points, `None` if any variable is continuous
    /// with nonzero width.
    pub fn feasible_count(&self) -> Option<u64> {
        let mut total: u64 = 1;
        for v in &self.vars {
            let n = match v.cardinality() {
                Some(n) => n,
                None if v.width() == 0.0 => 1,
                None => return None,
            };
            total = total.saturating_mul(n);
        }
        Some(total)
    }

    /// Map a raw point into the unit box.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .zip(x)
            .map(|(v, &xi)| if v.width() > 0.0 { (xi - v.lower) / v.width() } else { 0.0 })
            .collect()
    }

    /// Inverse of [`Bounds::normalize`].
    pub fn denormalize(&self, u: &[f64]) -> Vec<f64> {
        self.vars.iter().zip(u).map(|(v, &ui)| v.lower + ui * v.width()).collect()
    }

    /// Replace the bounds of variable `name`.
    pub fn with_override(mut self, over: &VarBounds) -> Result<Self, BoundsError> {
        match self.vars.iter_mut().find(|v| v.name == over.name) {
            Some(v) => *v = over.clone(),
            None => self.vars.push(over.clone()),
        }
        Bounds::new(self.vars)
    }
}
