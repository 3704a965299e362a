//! Analytic test functions with known minima, used to check the optimizer
//! independently of the joint model.

use std::str::FromStr;

use thiserror::Error;

use crate::space::{Bounds, VarBounds};

/// Centers of the default mixed-integer quadratic: three reals, two integers.
pub const MIQ_CENTER: [f64; 5] = [0.5, -1.25, 2.0, 3.0, -2.0];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntheticError {
    #[error("unknown synthetic function `{0}` (expected sphere, rosenbrock or mixed-integer-quadratic)")]
    Unknown(String),
    #[error("`{name}` expects {expected} variables, got {got}")]
    Dimension { name: &'static str, expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Synthetic {
    Sphere,
    Rosenbrock,
    /// `Σ (x_i − c_i)²` over [`MIQ_CENTER`]; the last two coordinates are integral.
    MixedIntegerQuadratic,
}

impl FromStr for Synthetic {
    type Err = SyntheticError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sphere" => Ok(Synthetic::Sphere),
            "rosenbrock" => Ok(Synthetic::Rosenbrock),
            "mixed-integer-quadratic" => Ok(Synthetic::MixedIntegerQuadratic),
            other => Err(SyntheticError::Unknown(other.to_string())),
        }
    }
}

impl Synthetic {
    pub fn name(&self) -> &'static str {
        match self {
            Synthetic::Sphere => "sphere",
            Synthetic::Rosenbrock => "rosenbrock",
            Synthetic::MixedIntegerQuadratic => "mixed-integer-quadratic",
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, SyntheticError> {
        match self {
            Synthetic::Sphere => Ok(x.iter().map(|v| v * v).sum()),
            Synthetic::Rosenbrock => {
                if x.len() < 2 {
                    return Err(SyntheticError::Dimension { name: self.name(), expected: 2, got: x.len() });
                }
                Ok(x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum())
            }
            Synthetic::MixedIntegerQuadratic => {
                if x.len() != MIQ_CENTER.len() {
                    return Err(SyntheticError::Dimension { name: self.name(), expected: 5, got: x.len() });
                }
                Ok(x.iter().zip(MIQ_CENTER).map(|(a, c)| (a - c).powi(2)).sum())
            }
        }
    }

    /// Global minimizer and minimum value.
    pub fn minimum(&self, dim: usize) -> (Vec<f64>, f64) {
        match self {
            Synthetic::Sphere => (vec![0.0; dim], 0.0),
            Synthetic::Rosenbrock => (vec![1.0; dim], 0.0),
            Synthetic::MixedIntegerQuadratic => (MIQ_CENTER.to_vec(), 0.0),
        }
    }

    /// Conventional search box.
    pub fn bounds(&self, dim: usize) -> Bounds {
        match self {
            Synthetic::Sphere => Bounds::uniform(dim, -5.0, 5.0).unwrap(),
            Synthetic::Rosenbrock => Bounds::uniform(dim, -2.0, 2.0).unwrap(),
            Synthetic::MixedIntegerQuadratic => Bounds::new(vec![
                VarBounds::real("x0", -5.0, 5.0),
                VarBounds::real("x1", -5.0, 5.0),
                VarBounds::real("x2", -5.0, 5.0),
                VarBounds::integer("n0", -5, 5),
                VarBounds::integer("n1", -5, 5),
            ])
            .unwrap(),
        }
    }
}

/// Evaluate a synthetic function by name.
pub fn synthetic_function(name: &str, x: &[f64]) -> Result<f64, SyntheticError> {
    name.parse::<Synthetic>()?.eval(x)
}
