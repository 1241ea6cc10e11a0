//! Sampling solutions on `[-1, 1]` and evaluating the discrete energy.

use serde::Serialize;

use super::{SolveReport, StationaryError};
use crate::numerics::{find_root, integrate_singular_n, Node};
use crate::phase_plane::{Orbit, ORBIT_MAX_LEVELS};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Increasing,
    Decreasing,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Increasing => Orientation::Decreasing,
            Orientation::Decreasing => Orientation::Increasing,
        }
    }
}

/// A stationary solution sampled on a grid of `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub xs: Vec<f64>,
    pub us: Vec<f64>,
    pub eps: f64,
    pub r: f64,
    pub n_transitions: usize,
    /// Direction of the first half-period.
    pub orientation: Orientation,
}

impl Profile {
    /// Trapezoid approximation of `∫ u dx`.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.xs, &self.us)
    }
}

pub(crate) fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// `ε ∫ dz / H⁺(f)` measured from one turning point, tabulated on
/// geometrically shrinking panels so that exponentially thin layers next to
/// the turning point are resolved.
struct SideClock<'a> {
    orbit: &'a Orbit,
    from_left: bool,
    e2: f64,
    tol: f64,
    /// Panel breakpoints `t_0 > t_1 > … > t_J` and the time to reach each.
    breaks: Vec<f64>,
    times: Vec<f64>,
}

impl<'a> SideClock<'a> {
    fn new(orbit: &'a Orbit, from_left: bool, eps: f64, t_mid: f64, tol: f64) -> Result<Self, StationaryError> {
        let mut clock = Self { orbit, from_left, e2: eps * eps, tol, breaks: Vec::new(), times: Vec::new() };
        let tp = orbit.turning_points();
        let slope = if from_left { tp.phi1 } else { -tp.phi2 };
        // Below t_stop the time from the turning point is ~ sqrt(2t/slope),
        // far below any grid spacing.
        let t_stop = (0.5 * slope * 1e-16).min(1e-6 * t_mid);
        let mut t = t_mid;
        clock.breaks.push(t);
        while t > t_stop {
            t *= 0.25;
            clock.breaks.push(t);
        }
        let mut increments = Vec::with_capacity(clock.breaks.len());
        for w in clock.breaks.windows(2) {
            increments.push(clock.span(w[1], w[0])?);
        }
        let mut acc = clock.span(0.0, *clock.breaks.last().unwrap())?;
        let mut times = vec![acc];
        for inc in increments.iter().rev() {
            acc += inc;
            times.push(acc);
        }
        times.reverse();
        clock.times = times;
        Ok(clock)
    }

    fn rate(&self, t: f64) -> f64 {
        let f = if self.from_left { self.orbit.f_from_left(t) } else { self.orbit.f_from_right(t) };
        (1.0 - self.e2 * f) / (f * (2.0 - self.e2 * f)).sqrt()
    }

    /// `∫_a^b dt / H⁺(f)` in offsets from the turning point.
    fn span(&self, a: f64, b: f64) -> Result<f64, StationaryError> {
        if b <= a {
            return Ok(0.0);
        }
        let r = integrate_singular_n(
            a,
            b,
            |node: Node| {
                let t = if node.from_lo <= node.from_hi { a + node.from_lo } else { b - node.from_hi };
                [self.rate(t)]
            },
            self.tol,
            ORBIT_MAX_LEVELS,
        );
        if !r.converged {
            return Err(StationaryError::Profile(format!(
                "time integral on [{a:e}, {b:e}] did not converge"
            )));
        }
        Ok(r.values[0])
    }

    fn total(&self) -> f64 {
        self.times[0]
    }

    /// Offset `t` from the turning point reached after time `s`.
    fn invert(&self, s: f64) -> Result<f64, StationaryError> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        let j = self.times.iter().rposition(|&tj| tj >= s);
        let (lo, hi, base) = match j {
            None => return Ok(self.breaks[0]),
            Some(j) if j + 1 < self.breaks.len() => (self.breaks[j + 1], self.breaks[j], self.times[j + 1]),
            Some(j) => (0.0, self.breaks[j], 0.0),
        };
        let mut failure = None;
        let t = find_root(
            |t| match self.span(lo, t) {
                Ok(v) => base + v - s,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            1e-15 * hi,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        t.map_err(|e| StationaryError::Profile(format!("profile inversion failed: {e}")))
    }
}

/// Maps a time along one half-period to the value of the solution.
pub(crate) struct HalfPeriodMap<'a> {
    orbit: &'a Orbit,
    left: SideClock<'a>,
    right: SideClock<'a>,
}

impl<'a> HalfPeriodMap<'a> {
    pub(crate) fn new(orbit: &'a Orbit, eps: f64, tol: f64) -> Result<Self, StationaryError> {
        let span = orbit.z2() - orbit.z1();
        let t_mid = 0.5 * span;
        Ok(Self {
            orbit,
            left: SideClock::new(orbit, true, eps, t_mid, tol)?,
            right: SideClock::new(orbit, false, eps, span - t_mid, tol)?,
        })
    }

    /// Length of the half-period in the stretched variable.
    pub(crate) fn period(&self) -> f64 {
        self.left.total() + self.right.total()
    }

    /// `z` after the fraction `phi ∈ [0, 1]` of an increasing half-period.
    pub(crate) fn z_at_fraction(&self, phi: f64) -> Result<f64, StationaryError> {
        let s = phi * self.period();
        if phi <= 0.0 {
            return Ok(self.orbit.z1());
        }
        if phi >= 1.0 {
            return Ok(self.orbit.z2());
        }
        if s <= self.left.total() {
            Ok(self.orbit.z1() + self.left.invert(s)?)
        } else {
            Ok(self.orbit.z2() - self.right.invert(self.period() - s)?)
        }
    }
}

/// Uniform grid of `grid_size` points on `[-1, 1]`.
pub fn uniform_grid(grid_size: usize) -> Vec<f64> {
    let m = (grid_size - 1) as f64;
    (0..grid_size).map(|i| -1.0 + 2.0 * i as f64 / m).collect()
}

/// Samples the solution of `report` on a uniform grid, first half-period
/// increasing.
///
/// Each grid point is placed by inverting the time integral along the orbit
/// directly, so layers of any thinness are resolved to quadrature accuracy.
pub fn reconstruct_profile(report: &SolveReport, grid_size: usize) -> Result<Profile, StationaryError> {
    if grid_size < 2 {
        return Err(StationaryError::Profile("grid_size must be at least 2".into()));
    }
    reconstruct_profile_at(report, uniform_grid(grid_size))
}

/// Samples the solution of `report` at arbitrary sorted points of `[-1, 1]`.
pub fn reconstruct_profile_at(report: &SolveReport, xs: Vec<f64>) -> Result<Profile, StationaryError> {
    if xs.is_empty() || xs.iter().any(|x| !(-1.0..=1.0).contains(x)) {
        return Err(StationaryError::Profile("sample points must lie in [-1, 1]".into()));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(StationaryError::Profile("sample points must be strictly increasing".into()));
    }
    let map = HalfPeriodMap::new(&report.orbit, report.eps, 1e-13)?;
    let n = report.n_transitions;
    let mut us = Vec::with_capacity(xs.len());
    for &x in &xs {
        let pos = ((x + 1.0) * n as f64 / 2.0).min(n as f64);
        let k = (pos.floor() as usize).min(n - 1);
        let frac = pos - k as f64;
        let phi = if k.is_multiple_of(2) { frac } else { 1.0 - frac };
        us.push(map.z_at_fraction(phi)?);
    }
    let first = xs.iter().take_while(|&&x| x <= -1.0 + 2.0 / n as f64).count();
    for w in us[..first].windows(2) {
        if !(w[1] >= w[0]) {
            return Err(StationaryError::Profile("reconstructed profile is not monotone".into()));
        }
    }
    Ok(Profile {
        xs,
        us,
        eps: report.eps,
        r: report.r,
        n_transitions: n,
        orientation: Orientation::Increasing,
    })
}

/// The reflection `x ↦ u(-x)`.
pub fn reversal(profile: &Profile) -> Profile {
    Profile {
        xs: profile.xs.iter().rev().map(|x| -x).collect(),
        us: profile.us.iter().rev().copied().collect(),
        orientation: profile.orientation.flipped(),
        ..profile.clone()
    }
}

/// `Q(ε²g)/ε²` without cancellation.
#[inline]
pub(crate) fn gradient_density(eps: f64, g: f64) -> f64 {
    let e2 = eps * eps;
    let s = e2 * g;
    e2 * g * g / ((1.0 + s * s).sqrt() + 1.0)
}

/// Discrete energy: the gradient term by the midpoint rule on cell faces,
/// the potential term by the trapezoid rule on nodes.
pub fn energy_of_profile(p: &PotentialSpec, eps: f64, profile: &Profile) -> f64 {
    let xs = &profile.xs;
    let us = &profile.us;
    let grad: f64 = xs
        .windows(2)
        .zip(us.windows(2))
        .map(|(x, u)| {
            let dx = x[1] - x[0];
            dx * gradient_density(eps, (u[1] - u[0]) / dx)
        })
        .sum();
    let fu: Vec<f64> = us.iter().map(|&u| p.f(u)).collect();
    grad + trapezoid(xs, &fu)
}
