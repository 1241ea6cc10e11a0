//! First-integral machinery for the stationary equation.
//!
//! A stationary point `z(t)` in the stretched variable `t = x/ε` satisfies
//! `P_ε(z') = Φ_σ(z) - b`, so the orbit through a pair `Δ = (σ, b)` is
//! traversed with speed `H⁺_ε(f_Δ(z))`, where `f_Δ = Φ_σ - b`.
//!
//! Near the Maxwell point `b` agrees with the well values of `Φ_σ` to
//! dozens of digits, so `f_Δ` is never formed by subtracting `b` from
//! `Φ_σ(z)`. An [`Orbit`] keeps the offsets `h1 = b - Φ_σ(α_σ)` and
//! `h2 = b - Φ_σ(β_σ)` as primary data and evaluates `f_Δ` from exact
//! Taylor expansions about the two turning points.

use serde::Serialize;
use thiserror::Error;

use crate::numerics::poly::{horner, reflect, taylor_shift};
use crate::numerics::{find_root, integrate_singular_n, Node, RootError};
use crate::potential::{CriticalTriple, MaxwellPoint, PotentialError, PotentialSpec, SpinodalData};

/// Maximum tanh-sinh level used for orbit integrals.
pub const ORBIT_MAX_LEVELS: usize = 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("eps = {eps} outside (0, F̄ = {f_bar})")]
    EpsOutOfRange { eps: f64, f_bar: f64 },
    #[error("xi = {xi} outside [0, eps^-2) for eps = {eps}")]
    Domain { eps: f64, xi: f64 },
    #[error("pair (sigma = {sigma}, b = {b}) is not admissible: {reason:?}")]
    Inadmissible { sigma: f64, b: f64, reason: Admissibility },
    #[error("quadrature for {what} did not converge (err estimate {err_estimate:e})")]
    Quadrature { what: &'static str, err_estimate: f64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// The pair `Δ = (σ, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pair {
    pub sigma: f64,
    pub b: f64,
}

/// Extreme values of the orbit and the slope of `Φ_σ` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurningPoints {
    pub z1: f64,
    pub z2: f64,
    /// `Φ'_σ(z1) > 0`.
    pub phi1: f64,
    /// `Φ'_σ(z2) < 0`.
    pub phi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsBound {
    pub f_bar: f64,
}

/// Outcome of the admissibility test, with the reason for rejection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Admissibility {
    Admissible,
    SigmaOutOfRange,
    /// `b` does not exceed both well values of `Φ_σ`.
    BelowWells,
    /// `b` is not below the saddle value `Φ_σ(ζ_σ)`.
    AboveSaddle,
}

/// A validated potential together with its spinodal data, Maxwell point
/// and ε-bound.
#[derive(Debug, Clone)]
pub struct Model {
    pub potential: PotentialSpec,
    pub spinodal: SpinodalData,
    pub maxwell: MaxwellPoint,
    pub eps_bound: EpsBound,
}

impl Model {
    pub fn new(potential: PotentialSpec) -> Result<Self, PotentialError> {
        let spinodal = potential.validate()?;
        let maxwell = potential.maxwell_point(1e-15)?;
        let eps_bound = eps_bound(&maxwell, &potential);
        Ok(Self { potential, spinodal, maxwell, eps_bound })
    }

    pub fn check_eps(&self, eps: f64) -> Result<(), PhaseError> {
        if eps > 0.0 && eps < self.eps_bound.f_bar {
            Ok(())
        } else {
            Err(PhaseError::EpsOutOfRange { eps, f_bar: self.eps_bound.f_bar })
        }
    }
}

/// `P_ε(s) = ε⁻²(1 - 1/√(1 + ε²s²))`.
pub fn p_eps(eps: f64, s: f64) -> f64 {
    let w = eps * s;
    let root = (1.0 + w * w).sqrt();
    // 1 - 1/root written without cancellation.
    s * s / (root * (1.0 + root))
}

/// Inverse of `P_ε` on `s ≥ 0`.
pub fn h_plus(eps: f64, xi: f64) -> Result<f64, PhaseError> {
    let e2 = eps * eps;
    if !(xi >= 0.0) || !(e2 * xi < 1.0) {
        return Err(PhaseError::Domain { eps, xi });
    }
    Ok((xi * (2.0 - e2 * xi)).sqrt() / (1.0 - e2 * xi))
}

/// Inverse of `P_ε` on `s ≤ 0`.
pub fn h_minus(eps: f64, xi: f64) -> Result<f64, PhaseError> {
    h_plus(eps, xi).map(|v| -v)
}

/// `F̄ = [Φ_σ0(ζ0) - b0]^{-1/2}`, the largest admissible ε.
pub fn eps_bound(mp: &MaxwellPoint, p: &PotentialSpec) -> EpsBound {
    let saddle = p.f(mp.zeta0) - mp.sigma0 * mp.zeta0 - mp.b0;
    EpsBound { f_bar: saddle.powf(-0.5) }
}

pub fn admissibility(p: &PotentialSpec, delta: Pair) -> Admissibility {
    let Ok(c) = p.critical_points(delta.sigma, 0.0) else {
        return Admissibility::SigmaOutOfRange;
    };
    let phi = |z: f64| p.f(z) - delta.sigma * z;
    if !(delta.b > phi(c.alpha_sigma) && delta.b > phi(c.beta_sigma)) {
        Admissibility::BelowWells
    } else if !(delta.b < phi(c.zeta_sigma)) {
        Admissibility::AboveSaddle
    } else {
        Admissibility::Admissible
    }
}

pub fn is_admissible(p: &PotentialSpec, delta: Pair) -> bool {
    admissibility(p, delta) == Admissibility::Admissible
}

/// The periodic orbit of a pair, stored through well offsets and local
/// expansions of `f_Δ` about the turning points.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    sigma: f64,
    b: f64,
    h1: f64,
    h2: f64,
    crit: CriticalTriple,
    s1: f64,
    s2: f64,
    z1: f64,
    z2: f64,
    /// `f(z1 + t) = t · left(t)`.
    left: Vec<f64>,
    /// `f(z2 - t) = t · right(t)`.
    right: Vec<f64>,
    f_max: f64,
}

impl Orbit {
    /// Orbit through an explicit pair; the offsets are formed by
    /// subtraction.
    pub fn from_pair(p: &PotentialSpec, delta: Pair) -> Result<Self, PhaseError> {
        let crit = p
            .critical_points(delta.sigma, 0.0)
            .map_err(|_| inadmissible(delta, Admissibility::SigmaOutOfRange))?;
        let phi = |z: f64| p.f(z) - delta.sigma * z;
        let h1 = delta.b - phi(crit.alpha_sigma);
        let h2 = delta.b - phi(crit.beta_sigma);
        Self::build(p, delta.sigma, delta.b, h1, h2, crit)
    }

    /// Orbit with slope `sigma` lying `h1` above the left well and `h2`
    /// above the right well of `Φ_σ`.
    pub fn from_offsets(p: &PotentialSpec, sigma: f64, h1: f64, h2: f64) -> Result<Self, PhaseError> {
        let crit = p.critical_points(sigma, 0.0).map_err(|_| {
            inadmissible(Pair { sigma, b: f64::NAN }, Admissibility::SigmaOutOfRange)
        })?;
        let b = p.f(crit.alpha_sigma) - sigma * crit.alpha_sigma + h1;
        Self::build(p, sigma, b, h1, h2, crit)
    }

    fn build(
        p: &PotentialSpec,
        sigma: f64,
        b: f64,
        h1: f64,
        h2: f64,
        crit: CriticalTriple,
    ) -> Result<Self, PhaseError> {
        let delta = Pair { sigma, b };
        if !(h1 > 0.0 && h2 > 0.0) {
            return Err(inadmissible(delta, Admissibility::BelowWells));
        }
        let gibbs = p.gibbs_coeffs(sigma);

        // Φ_σ(α_σ + s) - b, with the constant and linear terms exact.
        let mut from_alpha = taylor_shift(&gibbs, crit.alpha_sigma);
        from_alpha[0] = -h1;
        from_alpha[1] = 0.0;
        // Φ_σ(β_σ - s) - b.
        let mut from_beta = reflect(&taylor_shift(&gibbs, crit.beta_sigma));
        from_beta[0] = -h2;
        from_beta[1] = 0.0;

        let reach_l = crit.zeta_sigma - crit.alpha_sigma;
        let reach_r = crit.beta_sigma - crit.zeta_sigma;
        let saddle_l = horner(&from_alpha, reach_l);
        let saddle_r = horner(&from_beta, reach_r);
        if !(saddle_l > 0.0 && saddle_r > 0.0) {
            return Err(inadmissible(delta, Admissibility::AboveSaddle));
        }
        let s1 = find_root(|s| horner(&from_alpha, s), 0.0, reach_l, 0.0)?;
        let s2 = find_root(|s| horner(&from_beta, s), 0.0, reach_r, 0.0)?;

        let mut left = taylor_shift(&from_alpha, s1);
        left.remove(0);
        let mut right = taylor_shift(&from_beta, s2);
        right.remove(0);

        Ok(Self {
            sigma,
            b,
            h1,
            h2,
            crit,
            s1,
            s2,
            z1: crit.alpha_sigma + s1,
            z2: crit.beta_sigma - s2,
            left,
            right,
            f_max: 0.5 * (saddle_l + saddle_r),
        })
    }

    pub fn pair(&self) -> Pair {
        Pair { sigma: self.sigma, b: self.b }
    }

    /// `(h1, h2)`, the well offsets of `b`.
    pub fn offsets(&self) -> (f64, f64) {
        (self.h1, self.h2)
    }

    pub fn critical_points(&self) -> CriticalTriple {
        self.crit
    }

    /// `(z1 - α_σ, β_σ - z2)`.
    pub fn well_distances(&self) -> (f64, f64) {
        (self.s1, self.s2)
    }

    pub fn turning_points(&self) -> TurningPoints {
        TurningPoints {
            z1: self.z1,
            z2: self.z2,
            phi1: self.left[0],
            phi2: -self.right[0],
        }
    }

    pub fn z1(&self) -> f64 {
        self.z1
    }

    pub fn z2(&self) -> f64 {
        self.z2
    }

    /// `Φ_σ(ζ_σ) - b`, the largest value of `f_Δ` on the orbit.
    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    /// `f_Δ(z1 + t)`.
    #[inline]
    pub fn f_from_left(&self, t: f64) -> f64 {
        t * horner(&self.left, t)
    }

    /// `f_Δ(z2 - t)`.
    #[inline]
    pub fn f_from_right(&self, t: f64) -> f64 {
        t * horner(&self.right, t)
    }

    /// `f_Δ` at a node, expanded about the nearer turning point.
    #[inline]
    pub fn f_at_node(&self, node: Node) -> f64 {
        if node.from_lo <= node.from_hi {
            self.f_from_left(node.from_lo)
        } else {
            self.f_from_right(node.from_hi)
        }
    }

    /// `f_Δ(z)` for `z1 ≤ z ≤ z2`.
    pub fn f_delta(&self, z: f64) -> f64 {
        self.f_at_node(Node { z, from_lo: z - self.z1, from_hi: self.z2 - z })
    }

    /// `Φ'_σ(z)` from the local expansions, accurate near the turning points.
    pub fn dphi_at_node(&self, node: Node) -> f64 {
        if node.from_lo <= node.from_hi {
            deriv_times_t(&self.left, node.from_lo)
        } else {
            -deriv_times_t(&self.right, node.from_hi)
        }
    }

    pub fn check_eps(&self, eps: f64) -> Result<(), PhaseError> {
        if eps > 0.0 && eps * eps * self.f_max < 1.0 {
            Ok(())
        } else {
            Err(PhaseError::Domain { eps, xi: self.f_max })
        }
    }

    /// `(I_0, I_1)` over one increasing half-period.
    pub fn moments(&self, eps: f64, rel_tol: f64) -> Result<(f64, f64), PhaseError> {
        self.check_eps(eps)?;
        let e2 = eps * eps;
        let r = integrate_singular_n(
            self.z1,
            self.z2,
            |node| {
                let f = self.f_at_node(node);
                let w = (1.0 - e2 * f) / (f * (2.0 - e2 * f)).sqrt();
                [w, w * self.z_at(node)]
            },
            rel_tol,
            ORBIT_MAX_LEVELS,
        );
        if !r.converged {
            return Err(PhaseError::Quadrature {
                what: "moment integrals",
                err_estimate: r.err_estimates[0].max(r.err_estimates[1]),
            });
        }
        Ok((r.values[0], r.values[1]))
    }

    /// `T(Δ) = I_0`.
    pub fn half_period(&self, eps: f64, rel_tol: f64) -> Result<f64, PhaseError> {
        self.moments(eps, rel_tol).map(|m| m.0)
    }

    /// `I_n` for `n ∈ {0, 1}`.
    pub fn moment_integral(&self, eps: f64, n: u32, rel_tol: f64) -> Result<f64, PhaseError> {
        let (i0, i1) = self.moments(eps, rel_tol)?;
        match n {
            0 => Ok(i0),
            1 => Ok(i1),
            _ => panic!("moment_integral supports n = 0 or 1, got {n}"),
        }
    }

    /// `∫ √(f(2 - ε²f)) dz` over the half-period.
    pub fn action(&self, eps: f64, rel_tol: f64) -> Result<f64, PhaseError> {
        self.check_eps(eps)?;
        let e2 = eps * eps;
        let r = integrate_singular_n(
            self.z1,
            self.z2,
            |node| {
                let f = self.f_at_node(node);
                [(f * (2.0 - e2 * f)).sqrt()]
            },
            rel_tol,
            ORBIT_MAX_LEVELS,
        );
        if !r.converged {
            return Err(PhaseError::Quadrature { what: "orbit action", err_estimate: r.err_estimates[0] });
        }
        Ok(r.values[0])
    }

    /// Energy of the solution made of `n` half-periods of this orbit with
    /// mass parameter `r`: `2(σr + b) + nε ∫ √(f(2 - ε²f)) dz`.
    pub fn energy(&self, eps: f64, r: f64, n: usize, rel_tol: f64) -> Result<f64, PhaseError> {
        let a = self.action(eps, rel_tol)?;
        Ok(2.0 * (self.sigma * r + self.b) + n as f64 * eps * a)
    }

    /// `z` at a node, measured from the nearer endpoint.
    #[inline]
    pub fn z_at(&self, node: Node) -> f64 {
        if node.from_lo <= node.from_hi {
            self.z1 + node.from_lo
        } else {
            self.z2 - node.from_hi
        }
    }
}

/// `d/dt [t q(t)]`.
fn deriv_times_t(q: &[f64], t: f64) -> f64 {
    q.iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (k, &a)| acc * t + (k as f64 + 1.0) * a)
}

fn inadmissible(delta: Pair, reason: Admissibility) -> PhaseError {
    PhaseError::Inadmissible { sigma: delta.sigma, b: delta.b, reason }
}

/// Turning points of an admissible pair.
pub fn turning_points(p: &PotentialSpec, delta: Pair) -> Result<TurningPoints, PhaseError> {
    Orbit::from_pair(p, delta).map(|o| o.turning_points())
}

/// `T(Δ)` for ε checked against the model's bound.
pub fn half_period(model: &Model, delta: Pair, eps: f64, rel_tol: f64) -> Result<f64, PhaseError> {
    model.check_eps(eps)?;
    Orbit::from_pair(&model.potential, delta)?.half_period(eps, rel_tol)
}

/// `I_n(Δ; ε)` for `n ∈ {0, 1}`.
pub fn moment_integral(
    model: &Model,
    delta: Pair,
    eps: f64,
    n: u32,
    rel_tol: f64,
) -> Result<f64, PhaseError> {
    model.check_eps(eps)?;
    Orbit::from_pair(&model.potential, delta)?.moment_integral(eps, n, rel_tol)
}

/// Energy of the simple solution with pair `Δ` at mass parameter `r`.
pub fn orbit_energy(
    model: &Model,
    delta: Pair,
    eps: f64,
    r: f64,
    rel_tol: f64,
) -> Result<f64, PhaseError> {
    model.check_eps(eps)?;
    Orbit::from_pair(&model.potential, delta)?.energy(eps, r, 1, rel_tol)
}

/// `c_ε = ∫_{α0}^{β0} √(Φ̃ (2 - ε²Φ̃)) ds` with `Φ̃ = Φ_σ0 - b0`.
pub fn c_eps(model: &Model, eps: f64, rel_tol: f64) -> Result<f64, PhaseError> {
    if !(eps >= 0.0 && eps < model.eps_bound.f_bar) {
        return Err(PhaseError::EpsOutOfRange { eps, f_bar: model.eps_bound.f_bar });
    }
    let mp = &model.maxwell;
    let gibbs = model.potential.gibbs_coeffs(mp.sigma0);
    // Both wells are double roots of Φ̃; keep t² as an explicit factor.
    let mut left = taylor_shift(&gibbs, mp.alpha0);
    left.drain(..2);
    let mut right = reflect(&taylor_shift(&gibbs, mp.beta0));
    right.drain(..2);
    let e2 = eps * eps;
    let r = integrate_singular_n(
        mp.alpha0,
        mp.beta0,
        |node| {
            let f = if node.from_lo <= node.from_hi {
                node.from_lo * node.from_lo * horner(&left, node.from_lo)
            } else {
                node.from_hi * node.from_hi * horner(&right, node.from_hi)
            };
            let f = f.max(0.0);
            [(f * (2.0 - e2 * f)).sqrt()]
        },
        rel_tol,
        ORBIT_MAX_LEVELS,
    );
    if !r.converged {
        return Err(PhaseError::Quadrature { what: "c_eps", err_estimate: r.err_estimates[0] });
    }
    Ok(r.values[0])
}
