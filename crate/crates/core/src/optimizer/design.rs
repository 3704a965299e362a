use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use thiserror::Error;

use crate::space::Bounds;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot place {requested} distinct points in a box with {available} feasible points")]
pub struct CannotPlaceDistinctPoints {
    pub requested: usize,
    pub available: u64,
}

/// Conventional initial design size `2 (d + 1)`.
pub fn default_design_size(dim: usize) -> usize {
    2 * (dim + 1)
}

/// Latin-hypercube sample of `n_points` distinct feasible points.
///
/// Each coordinate is stratified into `n_points` equal slices of the unit
/// range, one sample per slice, then projected onto the bounds (integral
/// coordinates rounded). Points that collide after rounding are redrawn
/// uniformly.
pub fn initial_design(bounds: &Bounds, n_points: usize, seed: u64) -> Result<Vec<Vec<f64>>, CannotPlaceDistinctPoints> {
    if let Some(available) = bounds.feasible_count() {
        if (n_points as u64) > available {
            return Err(CannotPlaceDistinctPoints { requested: n_points, available });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = bounds.dim();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut strata: Vec<usize> = (0..n_points).collect();
        strata.shuffle(&mut rng);
        columns.push(strata.into_iter().map(|s| (s as f64 + rng.gen::<f64>()) / n_points as f64).collect());
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let u: Vec<f64> = columns.iter().map(|c| c[i]).collect();
        let mut x = bounds.project(&bounds.denormalize(&u));
        let mut tries = 0;
        while out.contains(&x) {
            tries += 1;
            if tries > 10_000 {
                return Err(CannotPlaceDistinctPoints {
                    requested: n_points,
                    available: bounds.feasible_count().unwrap_or(u64::MAX),
                });
            }
            x = random_point(bounds, &mut rng);
        }
        out.push(x);
    }
    Ok(out)
}

/// Uniform feasible point.
pub(crate) fn random_point<R: Rng>(bounds: &Bounds, rng: &mut R) -> Vec<f64> {
    let u: Vec<f64> = (0..bounds.dim()).map(|_| rng.gen()).collect();
    let x = bounds.denormalize(&u);
    // integral coordinates: every value equally likely
    bounds
        .vars()
        .iter()
        .zip(x)
        .map(|(v, xi)| if v.integer { rng.gen_range(v.lower as i64..=v.upper as i64) as f64 } else { v.project(xi) })
        .collect()
}
