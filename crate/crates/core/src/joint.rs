//! Design variables of a wave joint and its parametric centerline.
//!
//! A joint is described by five numbers: length `l_t` (mm), ridge count
//! `n_r`, wave height `h_t` (mm), wall thickness / offset `t_h` (mm) and
//! twist angle `alpha` (degrees). `n_r` and `alpha` are integral. All five are
//! stored as `f64` so that raw, unprojected vectors (network outputs, search
//! iterates) can be represented and validated.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{Bounds, VarBounds};

pub const VARIABLE_NAMES: [&str; 5] = ["l_t", "n_r", "h_t", "t_h", "alpha"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    pub l_t: f64,
    pub n_r: f64,
    pub h_t: f64,
    pub t_h: f64,
    pub alpha: f64,
}

impl JointConfig {
    pub const fn new(l_t: f64, n_r: f64, h_t: f64, t_h: f64, alpha: f64) -> Self {
        JointConfig { l_t, n_r, h_t, t_h, alpha }
    }

    pub fn from_slice(x: &[f64]) -> Self {
        assert_eq!(x.len(), 5, "joint configs have five variables");
        JointConfig::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.l_t, self.n_r, self.h_t, self.t_h, self.alpha]
    }

    /// Cosine amplitude `h_t/2 - t_h` of the centerline.
    pub fn amplitude(&self) -> f64 {
        self.h_t / 2.0 - self.t_h
    }

    /// Axial length of one ridge.
    pub fn period(&self) -> f64 {
        self.l_t / self.n_r
    }
}

impl fmt::Display for JointConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(l_t={}, n_r={}, h_t={}, t_h={}, alpha={})",
            self.l_t, self.n_r, self.h_t, self.t_h, self.alpha
        )
    }
}

/// Default design box: `l_t ∈ [15, 30]`, `n_r ∈ {3..6}`, `h_t ∈ [8, 14]`,
/// `t_h ∈ [0.5, 0.6]`, `alpha ∈ {0..24}`.
pub fn default_bounds() -> Bounds {
    Bounds::new(vec![
        VarBounds::real("l_t", 15.0, 30.0),
        VarBounds::integer("n_r", 3, 6),
        VarBounds::real("h_t", 8.0, 14.0),
        VarBounds::real("t_h", 0.5, 0.6),
        VarBounds::integer("alpha", 0, 24),
    ])
    .expect("default joint bounds are well formed")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigViolation {
    #[error("`{0}` is outside its bounds")]
    BoundViolation(&'static str),
    #[error("`{0}` must be integral")]
    IntegralityViolation(&'static str),
    #[error("wave amplitude h_t/2 - t_h is not positive")]
    AmplitudeNonPositive,
}

/// Every constraint a config breaks.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid joint config: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct Violations(pub Vec<ConfigViolation>);

/// Check `cfg` against `bounds` (which must describe the five joint variables in order).
pub fn validate_config(cfg: &JointConfig, bounds: &Bounds) -> Result<JointConfig, Violations> {
    assert_eq!(bounds.dim(), 5, "joint bounds have five variables");
    let mut out = Vec::new();
    for ((name, x), vb) in VARIABLE_NAMES.iter().zip(cfg.to_array()).zip(bounds.vars()) {
        if !(x >= vb.lower && x <= vb.upper) {
            out.push(ConfigViolation::BoundViolation(name));
        }
        if vb.integer && x.fract() != 0.0 {
            out.push(ConfigViolation::IntegralityViolation(name));
        }
    }
    if !(cfg.amplitude() > 0.0) {
        out.push(ConfigViolation::AmplitudeNonPositive);
    }
    if out.is_empty() {
        Ok(*cfg)
    } else {
        Err(Violations(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("axial coordinate {t} outside [0, {l_t}]")]
pub struct OutsideJoint {
    pub t: f64,
    pub l_t: f64,
}

/// Transverse offset of the wave centerline at axial coordinate `t`:
/// `y(t) = -(h_t/2 - t_h) cos(2π n_r t / l_t)`.
pub fn wave_profile(cfg: &JointConfig, t: f64) -> Result<f64, OutsideJoint> {
    if !(0.0..=cfg.l_t).contains(&t) {
        return Err(OutsideJoint { t, l_t: cfg.l_t });
    }
    Ok(wave_offset(cfg, t))
}

pub(crate) fn wave_offset(cfg: &JointConfig, t: f64) -> f64 {
    -(cfg.amplitude() * (2.0 * PI * cfg.n_r / cfg.l_t * t).cos())
}

/// `dy/dt` of the centerline.
pub(crate) fn wave_slope(cfg: &JointConfig, t: f64) -> f64 {
    let k = 2.0 * PI * cfg.n_r / cfg.l_t;
    cfg.amplitude() * k * (k * t).sin()
}

/// Project a raw 5-vector onto the feasible set: clamp, then round the
/// integral coordinates.
pub fn clamp_and_round(x: &[f64; 5], bounds: &Bounds) -> JointConfig {
    JointConfig::from_slice(&bounds.project(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig4() -> JointConfig {
        JointConfig::new(25.0, 4.0, 5.0, 0.5, 10.0)
    }

    #[test]
    fn validate_examples() {
        let b = default_bounds();
        let ok = JointConfig::new(20.0, 4.0, 10.0, 0.5, 12.0);
        assert_eq!(validate_config(&ok, &b), Ok(ok));

        let short = JointConfig::new(14.9, 4.0, 10.0, 0.5, 12.0);
        assert_eq!(
            validate_config(&short, &b),
            Err(Violations(vec![ConfigViolation::BoundViolation("l_t")]))
        );

        let frac = JointConfig::new(20.0, 3.5, 10.0, 0.5, 12.0);
        assert_eq!(
            validate_config(&frac, &b),
            Err(Violations(vec![ConfigViolation::IntegralityViolation("n_r")]))
        );
    }

    #[test]
    fn validate_reports_every_violation() {
        let b = default_bounds();
        let bad = JointConfig::new(40.0, 2.5, 1.0, 0.6, -1.0);
        let Err(Violations(v)) = validate_config(&bad, &b) else { panic!("should fail") };
        assert!(v.contains(&ConfigViolation::BoundViolation("l_t")));
        assert!(v.contains(&ConfigViolation::BoundViolation("n_r")));
        assert!(v.contains(&ConfigViolation::IntegralityViolation("n_r")));
        assert!(v.contains(&ConfigViolation::BoundViolation("h_t")));
        assert!(v.contains(&ConfigViolation::BoundViolation("alpha")));
        assert!(v.contains(&ConfigViolation::AmplitudeNonPositive));
    }

    #[test]
    fn profile_examples() {
        let c = fig4();
        assert!((wave_profile(&c, 0.0).unwrap() + 2.0).abs() < 1e-12);
        assert!((wave_profile(&c, 3.125).unwrap() - 2.0).abs() < 1e-12);
        assert!(wave_profile(&c, 1.5625).unwrap().abs() < 1e-12);
        assert!(wave_profile(&c, -0.1).is_err());
        assert!(wave_profile(&c, 25.1).is_err());
    }

    #[test]
    fn clamp_examples() {
        let b = default_bounds();
        assert_eq!(
            clamp_and_round(&[31.2, 3.4, 10.0, 0.5, 12.7], &b),
            JointConfig::new(30.0, 3.0, 10.0, 0.5, 13.0)
        );
        let inside = [20.0, 4.0, 10.0, 0.5, 12.0];
        assert_eq!(clamp_and_round(&inside, &b).to_array(), inside);
        assert_eq!(
            clamp_and_round(&[15.0, 6.5, 8.0, 0.55, -1.0], &b),
            JointConfig::new(15.0, 6.0, 8.0, 0.55, 0.0)
        );
        // ties round away from zero
        assert_eq!(clamp_and_round(&[20.0, 4.5, 10.0, 0.5, 11.5], &b).n_r, 5.0);
        assert_eq!(clamp_and_round(&[20.0, 4.5, 10.0, 0.5, 11.5], &b).alpha, 12.0);
    }

    proptest! {
        #[test]
        fn profile_is_periodic_and_bounded(
            l in 15.0f64..30.0, n in 3u32..=6, h in 8.0f64..14.0, t_h in 0.5f64..0.6, s in 0.0f64..1.0
        ) {
            let c = JointConfig::new(l, n as f64, h, t_h, 0.0);
            let p = c.period();
            let t = s * (l - p);
            let a = wave_profile(&c, t).unwrap();
            let b = wave_profile(&c, t + p).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!(a.abs() <= c.amplitude() + 1e-12);
        }

        #[test]
        fn projection_is_idempotent_and_valid(x in proptest::array::uniform5(-50.0f64..50.0)) {
            let b = default_bounds();
            let once = clamp_and_round(&x, &b);
            let twice = clamp_and_round(&once.to_array(), &b);
            prop_assert_eq!(once, twice);
            prop_assert!(validate_config(&once, &b).is_ok());
        }
    }
}
