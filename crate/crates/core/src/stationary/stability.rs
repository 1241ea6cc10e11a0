//! Second variation and the instability certificate for non-monotone
//! solutions.

use serde::Serialize;

use super::profile::{trapezoid, Orientation, Profile};
use super::{SolveReport, StationaryError};
use crate::numerics::{integrate_singular_n, Node};
use crate::phase_plane::ORBIT_MAX_LEVELS;
use crate::potential::PotentialSpec;

/// Largest `|∫ η dx|` accepted as zero mean.
pub const MEAN_TOL: f64 = 1e-10;

/// `J(u, η) = ∫ [ε² Q''(ε² u') η'² + F''(u) η²] dx`, with derivatives as
/// face differences and the potential term by the trapezoid rule, matching
/// [`super::energy_of_profile`].
pub fn second_variation(
    p: &PotentialSpec,
    eps: f64,
    profile: &Profile,
    eta: &[f64],
) -> Result<f64, StationaryError> {
    let xs = &profile.xs;
    let us = &profile.us;
    if eta.len() != us.len() {
        return Err(StationaryError::Profile(format!(
            "eta has {} samples, profile has {}",
            eta.len(),
            us.len()
        )));
    }
    let mean = trapezoid(xs, eta);
    if mean.abs() > MEAN_TOL {
        return Err(StationaryError::NonZeroMean(mean));
    }
    let e2 = eps * eps;
    let mut grad = 0.0;
    for i in 0..xs.len() - 1 {
        let dx = xs[i + 1] - xs[i];
        let s = e2 * (us[i + 1] - us[i]) / dx;
        let ge = (eta[i + 1] - eta[i]) / dx;
        grad += dx * e2 * ge * ge / (1.0 + s * s).powf(1.5);
    }
    let pot: Vec<f64> = us.iter().zip(eta).map(|(&u, &e)| p.d2f(u) * e * e).collect();
    Ok(grad + trapezoid(xs, &pot))
}

/// A direction of negative second variation for a non-monotone solution.
#[derive(Debug, Clone, Serialize)]
pub struct Destabilization {
    /// Weight of the correction `η1`.
    pub gamma: f64,
    /// `J(η0 + γη1) = J(η0) + 2γ B + γ² A`.
    #[serde(rename = "J")]
    pub j: f64,
    /// `B`, the cross term between `η0` and `η1`.
    pub linear_coeff: f64,
    /// `A = J(η1)`.
    pub quad_coeff: f64,
    /// `z''` at the left end in the stretched variable, `Φ'_σ` at the
    /// starting turning point.
    pub z_second: f64,
    /// `J(η0)` evaluated by quadrature; zero for an exact orbit.
    pub j_eta0: f64,
    /// Mean-zero perturbation sampled on the profile grid.
    pub eta: Vec<f64>,
}

/// Smooth step from 1 at `w = 0` to 0 at `w = 1` with flat ends.
fn step(w: f64) -> (f64, f64) {
    (1.0 - w * w * (3.0 - 2.0 * w), -6.0 * w * (1.0 - w))
}

/// Bump vanishing at both ends.
fn bump(w: f64) -> (f64, f64) {
    (w * (1.0 - w), 1.0 - 2.0 * w)
}

/// Builds `η0 + γη1` where `η0 = z'` on the first full period and `η1`
/// starts at 1 on the left boundary and is supported on the same period.
///
/// With `η0 = z'`, `J(η0)` vanishes up to quadrature error and the cross
/// term reduces to a boundary term, `B = -ε z''(start)`, so small `γ` of the sign of `z''`
/// makes `J` negative. Every coefficient is evaluated as an integral over
/// the orbit in the `z` variable.
pub fn destabilize_nonmonotone(
    p: &PotentialSpec,
    report: &SolveReport,
    profile: &Profile,
) -> Result<Destabilization, StationaryError> {
    let n = profile.n_transitions;
    if n < 2 {
        return Err(StationaryError::Profile(
            "destabilize_nonmonotone needs at least two transitions".into(),
        ));
    }
    let orbit = &report.orbit;
    let eps = profile.eps;
    let e2 = eps * eps;
    let (z1, z2) = (orbit.z1(), orbit.z2());
    let len = z2 - z1;
    // +1 if the first half-period increases.
    let dir = match profile.orientation {
        Orientation::Increasing => 1.0,
        Orientation::Decreasing => -1.0,
    };

    // Components: M1, M2, A1, A2, B1, B2, J00.
    let q = integrate_singular_n(
        z1,
        z2,
        |node: Node| {
            let f = orbit.f_at_node(node);
            let z = orbit.z_at(node);
            let w = if node.from_lo <= node.from_hi { node.from_lo / len } else { 1.0 - node.from_hi / len };
            let root = (f * (2.0 - e2 * f)).sqrt();
            let c = 1.0 - e2 * f;
            let zp = root / c;
            let inv_zp = c / root;
            let qpp = c * c * c;
            let fpp = p.d2f(z);
            let dphi = orbit.dphi_at_node(node);
            // ψ1 measured from the starting turning point.
            let (psi1, dpsi1) = if dir > 0.0 {
                let (v, d) = step(w);
                (v, d / len)
            } else {
                let (v, d) = step(1.0 - w);
                (v, -d / len)
            };
            let (psi2, d) = bump(w);
            let dpsi2 = d / len;
            [
                psi1 * inv_zp,
                psi2 * inv_zp,
                qpp * dpsi1 * dpsi1 * zp + fpp * psi1 * psi1 * inv_zp,
                qpp * dpsi2 * dpsi2 * zp + fpp * psi2 * psi2 * inv_zp,
                dphi * dpsi1 + fpp * psi1,
                dphi * dpsi2 + fpp * psi2,
                dphi * dphi / qpp * inv_zp + fpp * zp,
            ]
        },
        1e-12,
        ORBIT_MAX_LEVELS,
    );
    if !q.converged {
        return Err(StationaryError::Profile("second-variation integrals did not converge".into()));
    }
    let [m1, m2, a1, a2, b1, b2, j00] = q.values;
    let kappa = m1 / m2;
    let quad = eps * (a1 + kappa * kappa * a2);
    let linear = dir * eps * (b1 + kappa * b2);
    let tp = orbit.turning_points();
    let z_second = if dir > 0.0 { tp.phi1 } else { tp.phi2 };
    let j_eta0 = 2.0 * eps * j00;

    let sign = if linear < 0.0 { 1.0 } else { -1.0 };
    let mut gamma = sign;
    let mut found = None;
    for _ in 0..400 {
        let j = j_eta0 + 2.0 * gamma * linear + gamma * gamma * quad;
        if j < 0.0 {
            found = Some(j);
            break;
        }
        gamma *= 0.5;
    }
    let j = found.ok_or_else(|| {
        StationaryError::Profile("no weight in the search range gives a negative second variation".into())
    })?;

    let eta = sample_direction(profile, report, gamma, dir, len)?;
    Ok(Destabilization {
        gamma,
        j,
        linear_coeff: linear,
        quad_coeff: quad,
        z_second,
        j_eta0,
        eta,
    })
}

/// Samples `η0 + γ(ψ1 - κ_d ψ2)` on the profile grid, with `κ_d` chosen so
/// that the discrete mean vanishes.
fn sample_direction(
    profile: &Profile,
    report: &SolveReport,
    gamma: f64,
    dir: f64,
    len: f64,
) -> Result<Vec<f64>, StationaryError> {
    let orbit = &report.orbit;
    let eps = profile.eps;
    let e2 = eps * eps;
    let n = profile.n_transitions as f64;
    let z1 = orbit.z1();
    let half = 2.0 / n;
    let size = profile.xs.len();
    let mut eta0 = vec![0.0; size];
    let mut first = vec![0.0; size];
    let mut second = vec![0.0; size];
    for i in 0..size {
        let x = profile.xs[i];
        let u = profile.us[i];
        let hp = ((x + 1.0) / half).floor();
        if hp >= 2.0 {
            continue;
        }
        let f = orbit.f_delta(u.clamp(z1, orbit.z2())).max(0.0);
        let speed = (f * (2.0 - e2 * f)).sqrt() / (1.0 - e2 * f);
        let w = ((u - z1) / len).clamp(0.0, 1.0);
        if hp < 1.0 {
            eta0[i] = dir * speed;
            first[i] = step(if dir > 0.0 { w } else { 1.0 - w }).0;
        } else {
            eta0[i] = -dir * speed;
            second[i] = bump(w).0;
        }
    }
    let xs = &profile.xs;
    let m0 = trapezoid(xs, &eta0);
    let m1 = trapezoid(xs, &first);
    let m2 = trapezoid(xs, &second);
    if !(m2 > 0.0) {
        return Err(StationaryError::Profile("grid too coarse to resolve the second half-period".into()));
    }
    let kappa = (m0 + gamma * m1) / (gamma * m2);
    Ok((0..size)
        .map(|i| eta0[i] + gamma * (first[i] - kappa * second[i]))
        .collect())
}
