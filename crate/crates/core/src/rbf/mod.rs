//! Radial basis function surrogates.
//!
//! A surrogate has the form `s(x) = Σ λ_i σ(‖x − c_i‖) + p(x)`, with centers
//! `c_i` at the observed points (mapped into the unit box of the search
//! bounds) and `p` a polynomial tail of degree at most one. Exact observations
//! are interpolated. Noisy observations are smoothed: each gets a ridge term
//! on the diagonal of the interpolation matrix, which is halved until every
//! fitted value lies inside its relative noise band.

mod schedule;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::Fidelity;
use crate::space::Bounds;

pub use schedule::{UncertaintySchedule, DEFAULT_WEIGHT_CYCLE};

/// Points closer than this (in normalized coordinates) are the same node.
const COINCIDENT: f64 = 1e-12;
/// Slack allowed on the noise band and on node reproduction.
pub const NODE_TOLERANCE: f64 = 1e-8;
const MAX_RIDGE_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Kernel {
    /// `exp(−γ r²)`
    Gaussian { gamma: f64 },
    /// `r`
    Linear,
    /// `r³`
    #[default]
    Cubic,
    /// `r² ln r`
    ThinPlate,
    /// `sqrt(r² + γ²)`
    Multiquadric { gamma: f64 },
}

impl Kernel {
    #[inline]
    pub fn phi(&self, r: f64) -> f64 {
        match *self {
            Kernel::Gaussian { gamma } => (-gamma * r * r).exp(),
            Kernel::Linear => r,
            Kernel::Cubic => r * r * r,
            Kernel::ThinPlate => {
                if r > 0.0 {
                    r * r * r.ln()
                } else {
                    0.0
                }
            }
            Kernel::Multiquadric { gamma } => (r * r + gamma * gamma).sqrt(),
        }
    }

    /// Smallest tail that makes the interpolation problem well posed.
    pub fn default_tail(&self) -> Tail {
        match self {
            Kernel::Gaussian { .. } | Kernel::Multiquadric { .. } => Tail::Constant,
            Kernel::Linear | Kernel::Cubic | Kernel::ThinPlate => Tail::Affine,
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Kernel::Gaussian { gamma } | Kernel::Multiquadric { gamma } => gamma > 0.0 && gamma.is_finite(),
            _ => true,
        }
    }
}

/// Polynomial tail degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    None,
    Constant,
    Affine,
}

impl Tail {
    fn len(&self, dim: usize) -> usize {
        match self {
            Tail::None => 0,
            Tail::Constant => 1,
            Tail::Affine => dim + 1,
        }
    }
}

/// One observation handed to [`fit`], in raw (unnormalized) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub point: Vec<f64>,
    pub value: f64,
    pub fidelity: Fidelity,
}

impl Node {
    pub fn exact(point: Vec<f64>, value: f64) -> Self {
        Node { point, value, fidelity: Fidelity::Exact }
    }

    pub fn noisy(point: Vec<f64>, value: f64, cap: f64) -> Self {
        Node { point, value, fidelity: Fidelity::Noisy { cap } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub kernel: Kernel,
    /// `None` picks [`Kernel::default_tail`].
    pub tail: Option<Tail>,
    /// Initial ridge on noisy nodes, relative to the mean off-diagonal kernel value.
    pub ridge: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { kernel: Kernel::Cubic, tail: None, ridge: 1.0 }
    }
}

impl FitOptions {
    pub fn with_kernel(kernel: Kernel) -> Self {
        FitOptions { kernel, ..Default::default() }
    }

    pub fn tail(mut self, tail: Tail) -> Self {
        self.tail = Some(tail);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("no observations to fit")]
    Empty,
    #[error("observation {0} has the wrong dimension or lies outside the bounds")]
    OutsideBox(usize),
    #[error("observation {0} has a non-finite value")]
    NonFinite(usize),
    #[error("exact observations {0} and {1} coincide with different values")]
    DuplicateExactNodeConflict(usize, usize),
    #[error("interpolation system is not solvable (max node error {0:e})")]
    SingularInterpolation(f64),
    #[error("invalid kernel parameters")]
    InvalidKernel,
}

#[derive(Debug, Clone)]
struct Prepared {
    u: Vec<f64>,
    y: f64,
    lo: f64,
    hi: f64,
    exact: bool,
    first: usize,
}

/// A fitted radial basis interpolant. Immutable; evaluation is thread-safe.
#[derive(Debug, Clone)]
pub struct Surrogate {
    kernel: Kernel,
    tail: Tail,
    bounds: Bounds,
    centers: Vec<Vec<f64>>,
    lambda: Vec<f64>,
    tail_coeffs: Vec<f64>,
    ridge: f64,
}

/// Fit a surrogate to `nodes`; all points must lie inside `bounds`.
///
/// Coincident nodes are merged: equal exact values collapse to one node,
/// an exact node supersedes coincident noisy ones, and coincident noisy nodes
/// become one node whose band is the intersection of theirs (or, if the
/// bands are disjoint, their mean with the union band).
pub fn fit(nodes: &[Node], bounds: &Bounds, opts: &FitOptions) -> Result<Surrogate, FitError> {
    if nodes.is_empty() {
        return Err(FitError::Empty);
    }
    if !opts.kernel.is_valid() {
        return Err(FitError::InvalidKernel);
    }
    let dim = bounds.dim();
    let prepared = prepare(nodes, bounds)?;
    let n = prepared.len();

    let mut tail = opts.tail.unwrap_or_else(|| opts.kernel.default_tail());
    // an affine tail needs dim+1 points to be determined; fall back to a constant
    if tail == Tail::Affine && n < dim + 1 {
        tail = Tail::Constant;
    }
    let m = tail.len(dim);

    let mut phi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = opts.kernel.phi(dist(&prepared[i].u, &prepared[j].u));
            phi[(i, j)] = v;
            phi[(j, i)] = v;
        }
        phi[(i, i)] = opts.kernel.phi(0.0);
    }

    let any_noisy = prepared.iter().any(|p| !p.exact);
    let mut ridge = if any_noisy {
        let off: f64 = if n > 1 {
            phi.iter().map(|v| v.abs()).sum::<f64>() / (n * n - n).max(1) as f64
        } else {
            1.0
        };
        opts.ridge * if off > 0.0 { off } else { 1.0 }
    } else {
        0.0
    };

    for attempt in 0..=MAX_RIDGE_HALVINGS {
        let (lambda, tail_coeffs) = solve_system(&phi, &prepared, tail, m, ridge)?;
        let s = Surrogate {
            kernel: opts.kernel,
            tail,
            bounds: bounds.clone(),
            centers: prepared.iter().map(|p| p.u.clone()).collect(),
            lambda,
            tail_coeffs,
            ridge,
        };
        let mut exact_err: f64 = 0.0;
        let mut band_ok = true;
        for p in &prepared {
            let v = s.eval_normalized(&p.u);
            if p.exact {
                exact_err = exact_err.max((v - p.y).abs() / p.y.abs().max(1.0));
            } else if v < p.lo - NODE_TOLERANCE || v > p.hi + NODE_TOLERANCE || !v.is_finite() {
                band_ok = false;
            }
        }
        if !(exact_err <= NODE_TOLERANCE) {
            return Err(FitError::SingularInterpolation(exact_err));
        }
        if band_ok {
            return Ok(s);
        }
        log::trace!("noisy band violated at ridge {ridge:e} (attempt {attempt}); halving");
        ridge *= 0.5;
    }
    Err(FitError::SingularInterpolation(f64::NAN))
}

fn prepare(nodes: &[Node], bounds: &Bounds) -> Result<Vec<Prepared>, FitError> {
    let mut out: Vec<Prepared> = Vec::with_capacity(nodes.len());
    for (idx, node) in nodes.iter().enumerate() {
        if node.point.len() != bounds.dim() {
            return Err(FitError::OutsideBox(idx));
        }
        let inside = bounds
            .vars()
            .iter()
            .zip(&node.point)
            .all(|(v, &x)| x >= v.lower - 1e-9 * v.width().max(1.0) && x <= v.upper + 1e-9 * v.width().max(1.0));
        if !inside {
            return Err(FitError::OutsideBox(idx));
        }
        if !node.value.is_finite() {
            return Err(FitError::NonFinite(idx));
        }
        let u = bounds.normalize(&node.point);
        let (exact, lo, hi) = match node.fidelity {
            Fidelity::Exact => (true, node.value, node.value),
            Fidelity::Noisy { cap } => {
                let d = cap * node.value.abs();
                (false, node.value - d, node.value + d)
            }
        };
        let fresh = Prepared { u, y: node.value, lo, hi, exact, first: idx };
        match out.iter_mut().find(|p| dist(&p.u, &fresh.u) <= COINCIDENT) {
            None => out.push(fresh),
            Some(p) => merge(p, fresh)?,
        }
    }
    Ok(out)
}

fn merge(into: &mut Prepared, other: Prepared) -> Result<(), FitError> {
    match (into.exact, other.exact) {
        (true, true) => {
            let scale = into.y.abs().max(other.y.abs()).max(1.0);
            if (into.y - other.y).abs() > 1e-12 * scale {
                return Err(FitError::DuplicateExactNodeConflict(into.first, other.first));
            }
        }
        (true, false) => {}
        (false, true) => {
            let first = into.first;
            *into = other;
            into.first = first;
        }
        (false, false) => {
            let lo = into.lo.max(other.lo);
            let hi = into.hi.min(other.hi);
            if lo <= hi {
                into.y = 0.5 * (lo + hi);
                into.lo = lo;
                into.hi = hi;
            } else {
                into.y = 0.5 * (into.y + other.y);
                into.lo = into.lo.min(other.lo);
                into.hi = into.hi.max(other.hi);
            }
        }
    }
    Ok(())
}

fn tail_basis(u: &[f64], tail: Tail, out: &mut [f64]) {
    match tail {
        Tail::None => {}
        Tail::Constant => out[0] = 1.0,
        Tail::Affine => {
            out[0] = 1.0;
            out[1..].copy_from_slice(u);
        }
    }
}

fn solve_system(
    phi: &DMatrix<f64>,
    nodes: &[Prepared],
    tail: Tail,
    m: usize,
    ridge: f64,
) -> Result<(Vec<f64>, Vec<f64>), FitError> {
    let n = nodes.len();
    let size = n + m;
    let mut a = DMatrix::<f64>::zeros(size, size);
    a.view_mut((0, 0), (n, n)).copy_from(phi);
    let mut basis = vec![0.0; m];
    for (i, p) in nodes.iter().enumerate() {
        if !p.exact {
            a[(i, i)] += ridge;
        }
        tail_basis(&p.u, tail, &mut basis);
        for (k, b) in basis.iter().enumerate() {
            a[(i, n + k)] = *b;
            a[(n + k, i)] = *b;
        }
    }
    let mut rhs = DVector::<f64>::zeros(size);
    for (i, p) in nodes.iter().enumerate() {
        rhs[i] = p.y;
    }

    let sol = match a.clone().lu().solve(&rhs) {
        Some(mut x) if x.iter().all(|v| v.is_finite()) => {
            // two rounds of iterative refinement
            let lu = a.clone().lu();
            for _ in 0..2 {
                let r = &rhs - &a * &x;
                match lu.solve(&r) {
                    Some(dx) if dx.iter().all(|v| v.is_finite()) => x += dx,
                    _ => break,
                }
            }
            x
        }
        _ => {
            // rank-deficient system: minimum-norm least squares
            let svd = a.clone().svd(true, true);
            let tol = svd.singular_values.max() * size as f64 * f64::EPSILON;
            svd.solve(&rhs, tol).map_err(|_| FitError::SingularInterpolation(f64::INFINITY))?
        }
    };
    if !sol.iter().all(|v| v.is_finite()) {
        return Err(FitError::SingularInterpolation(f64::INFINITY));
    }
    Ok((sol.rows(0, n).iter().copied().collect(), sol.rows(n, m).iter().copied().collect()))
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl Surrogate {
    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// Centers in normalized coordinates.
    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.lambda
    }

    pub fn tail_coefficients(&self) -> &[f64] {
        &self.tail_coeffs
    }

    /// Ridge applied to noisy nodes in the accepted fit (0 if all exact).
    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Surrogate value at a raw point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_normalized(&self.bounds.normalize(x))
    }

    pub fn eval_normalized(&self, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for (c, l) in self.centers.iter().zip(&self.lambda) {
            s += l * self.kernel.phi(dist(u, c));
        }
        match self.tail {
            Tail::None => {}
            Tail::Constant => s += self.tail_coeffs[0],
            Tail::Affine => {
                s += self.tail_coeffs[0];
                s += self.tail_coeffs[1..].iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        s
    }

    /// Distance from `u` (normalized) to the nearest center.
    pub fn min_distance_normalized(&self, u: &[f64]) -> f64 {
        self.centers.iter().map(|c| dist(u, c)).fold(f64::INFINITY, f64::min)
    }

    /// Acquisition value `s(x) − w · d_min(x)` at a raw point; lower is better.
    pub fn merit(&self, x: &[f64], weight: f64) -> f64 {
        self.merit_normalized(&self.bounds.normalize(x), weight)
    }

    pub fn merit_normalized(&self, u: &[f64], weight: f64) -> f64 {
        let s = self.eval_normalized(u);
        if weight == 0.0 {
            s
        } else {
            s - weight * self.min_distance_normalized(u)
        }
    }
}
