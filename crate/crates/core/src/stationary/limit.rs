//! The single-interface limit and distances to it.

use serde::Serialize;

use super::profile::Profile;
use super::StationaryError;
use crate::potential::MaxwellPoint;

/// The step function taking the value `α0` on `[-1, -1 + ℓ1]` and `β0` on
/// the rest of `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitProfile {
    pub mp: MaxwellPoint,
    pub r: f64,
    pub ell1: f64,
    pub ell2: f64,
}

impl LimitProfile {
    pub fn interface(&self) -> f64 {
        -1.0 + self.ell1
    }
}

pub fn limit_profile(mp: &MaxwellPoint, r: f64) -> Result<LimitProfile, StationaryError> {
    if !(r > mp.alpha0 && r < mp.beta0) {
        return Err(StationaryError::Domain(format!(
            "r = {r} outside ({}, {})",
            mp.alpha0, mp.beta0
        )));
    }
    let ell1 = 2.0 * (mp.beta0 - r) / (mp.beta0 - mp.alpha0);
    Ok(LimitProfile { mp: *mp, r, ell1, ell2: 2.0 - ell1 })
}

pub fn limit_eval(lp: &LimitProfile, x: f64) -> f64 {
    if x <= lp.interface() {
        lp.mp.alpha0
    } else {
        lp.mp.beta0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceMetrics {
    /// `sup |u - u0|` away from the interface.
    pub sup_dev: f64,
    /// Where `u` crosses `(α0 + β0)/2`.
    pub interface_x: f64,
    pub interface_err: f64,
}

/// Distance of an increasing simple profile from the step function,
/// excluding `|x - (-1 + ℓ1)| < halfwidth`.
pub fn convergence_metrics(
    profile: &Profile,
    lp: &LimitProfile,
    halfwidth: f64,
) -> Result<ConvergenceMetrics, StationaryError> {
    let centre = lp.interface();
    let sup_dev = profile
        .xs
        .iter()
        .zip(&profile.us)
        .filter(|(&x, _)| (x - centre).abs() >= halfwidth)
        .map(|(&x, &u)| (u - limit_eval(lp, x)).abs())
        .fold(0.0, f64::max);
    let level = 0.5 * (lp.mp.alpha0 + lp.mp.beta0);
    let crossing = profile
        .us
        .windows(2)
        .position(|w| (w[0] - level) * (w[1] - level) <= 0.0 && w[0] != w[1])
        .ok_or_else(|| StationaryError::Profile("profile never crosses the midpoint level".into()))?;
    let (x0, x1) = (profile.xs[crossing], profile.xs[crossing + 1]);
    let (u0, u1) = (profile.us[crossing], profile.us[crossing + 1]);
    let interface_x = x0 + (level - u0) * (x1 - x0) / (u1 - u0);
    Ok(ConvergenceMetrics {
        sup_dev,
        interface_x,
        interface_err: (interface_x - centre).abs(),
    })
}
