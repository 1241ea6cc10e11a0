//! Newton solver for the length and mass conditions in log coordinates.

use serde::Serialize;

use super::StationaryError;
use crate::numerics::find_root;
use crate::phase_plane::{Model, Orbit, Pair, PhaseError, TurningPoints};

/// Rates and widths that set the exponential scale of the well offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverScaling {
    /// `[2F''(α0)]^{-1/2}`.
    pub b1: f64,
    /// `[2F''(β0)]^{-1/2}`.
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    /// `[B1 (β0 - α0)]^{-1}`.
    pub mu1: f64,
    pub mu2: f64,
}

/// `B_i`, `c_i(r)` and `μ_i` for mass parameter `r ∈ (α0, β0)`.
pub fn scaling(model: &Model, r: f64) -> Result<SolverScaling, StationaryError> {
    let mp = &model.maxwell;
    if !(r > mp.alpha0 && r < mp.beta0) {
        return Err(StationaryError::Domain(format!(
            "r = {r} outside ({}, {})",
            mp.alpha0, mp.beta0
        )));
    }
    let p = &model.potential;
    let gap = mp.beta0 - mp.alpha0;
    let b1 = (2.0 * p.d2f(mp.alpha0)).powf(-0.5);
    let b2 = (2.0 * p.d2f(mp.beta0)).powf(-0.5);
    let s2 = 2f64.sqrt();
    Ok(SolverScaling {
        b1,
        b2,
        c1: 2.0 * s2 * (mp.beta0 - r) / (b1 * gap),
        c2: 2.0 * s2 * (r - mp.alpha0) / (b2 * gap),
        mu1: 1.0 / (b1 * gap),
        mu2: 1.0 / (b2 * gap),
    })
}

/// The orbit whose well offsets are `(exp ln_h[0], exp ln_h[1])`.
///
/// The slope σ solves `Φ_σ(β_σ) - Φ_σ(α_σ) = h1 - h2`, whose left side is
/// strictly decreasing in σ.
pub fn pair_from_lnh(model: &Model, ln_h: [f64; 2]) -> Result<Orbit, StationaryError> {
    let (h1, h2) = (ln_h[0].exp(), ln_h[1].exp());
    if !(h1 > 0.0 && h2 > 0.0) || !h1.is_finite() || !h2.is_finite() {
        return Err(StationaryError::Domain(format!(
            "ln h = ({}, {}) does not give positive finite offsets",
            ln_h[0], ln_h[1]
        )));
    }
    let target = h1 - h2;
    let p = &model.potential;
    let s = &model.spinodal;
    let margin = 1e-9 * (s.sigma_hi - s.sigma_lo);
    let (lo, hi) = (s.sigma_lo + margin, s.sigma_hi - margin);
    let g = |sigma: f64| p.well_gap(sigma).map(|v| v - target).unwrap_or(f64::NAN);
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo > 0.0 && ghi < 0.0) {
        return Err(StationaryError::Domain(format!(
            "h1 - h2 = {target} outside the range of the well gap"
        )));
    }
    let sigma = find_root(g, lo, hi, 0.0).map_err(PhaseError::from)?;
    Ok(Orbit::from_offsets(p, sigma, h1, h2)?)
}

/// Knobs for [`solve_simple`] and [`solve_n_transition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Sup-norm tolerance on the residuals.
    pub tol: f64,
    /// Relative tolerance of the orbit integrals.
    pub quad_tol: f64,
    pub max_iter: usize,
    /// Finite-difference step in `ln h`.
    pub fd_step: f64,
    /// `r` must lie in `[α0 + δ, β0 - δ]` with `δ = r_margin (β0 - α0)`.
    pub r_margin: f64,
    /// Geometric factor between continuation steps in ε.
    pub continuation_factor: f64,
    pub max_continuation: usize,
    /// Starting point in `ln h`; defaults to `-c_i(r)/(nε)`.
    pub initial_ln_h: Option<[f64; 2]>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            quad_tol: 1e-13,
            max_iter: 60,
            fd_step: 1e-3,
            r_margin: 0.1,
            continuation_factor: 0.8,
            max_continuation: 40,
            initial_ln_h: None,
        }
    }
}

/// A solved stationary point.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub eps: f64,
    pub r: f64,
    pub n_transitions: usize,
    pub delta: Pair,
    pub ln_h: [f64; 2],
    /// `k_i` with `h_i = exp(μ_i k_i - c_i/(nε))`.
    pub k: [f64; 2],
    /// `(nε I_0 - 2, nε I_1 - 2r)`.
    pub residuals: [f64; 2],
    pub iterations: usize,
    pub energy: f64,
    pub tp: TurningPoints,
    #[serde(skip)]
    pub orbit: Orbit,
}

impl SolveReport {
    pub fn residual_norm(&self) -> f64 {
        self.residuals[0].abs().max(self.residuals[1].abs())
    }
}

/// One Newton iterate, kept for failure reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonStep {
    pub ln_h: [f64; 2],
    pub residual_norm: f64,
    pub damping: f64,
}

struct System<'a> {
    model: &'a Model,
    eps: f64,
    r: f64,
    n: usize,
    quad_tol: f64,
}

impl System<'_> {
    fn eval(&self, x: [f64; 2]) -> Result<([f64; 2], Orbit), StationaryError> {
        let orbit = pair_from_lnh(self.model, x)?;
        let (i0, i1) = orbit.moments(self.eps, self.quad_tol)?;
        let ne = self.n as f64 * self.eps;
        Ok(([ne * i0 - 2.0, ne * i1 - 2.0 * self.r], orbit))
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

struct NewtonOutcome {
    x: [f64; 2],
    res: [f64; 2],
    orbit: Orbit,
    iterations: usize,
}

fn newton(
    sys: &System,
    x0: [f64; 2],
    opts: &SolveOptions,
    trace: &mut Vec<NewtonStep>,
) -> Result<NewtonOutcome, StationaryError> {
    let mut x = x0;
    let (mut res, mut orbit) = sys.eval(x)?;
    trace.push(NewtonStep { ln_h: x, residual_norm: norm(res), damping: 0.0 });
    for it in 0..opts.max_iter {
        if norm(res) <= opts.tol {
            return Ok(NewtonOutcome { x, res, orbit, iterations: it });
        }
        let h = opts.fd_step;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let rp = sys.eval(xp)?.0;
            let rm = sys.eval(xm)?.0;
            for i in 0..2 {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det.abs() > 0.0) || !det.is_finite() {
            return Err(StationaryError::Solver {
                reason: "singular Jacobian".into(),
                trace: trace.clone(),
            });
        }
        let mut dx = [
            -(jac[1][1] * res[0] - jac[0][1] * res[1]) / det,
            -(-jac[1][0] * res[0] + jac[0][0] * res[1]) / det,
        ];
        let len = norm(dx);
        if len > 4.0 {
            dx = [dx[0] * 4.0 / len, dx[1] * 4.0 / len];
        }
        let mut lambda = 1.0;
        loop {
            let xt = [x[0] + lambda * dx[0], x[1] + lambda * dx[1]];
            if let Ok((rt, ot)) = sys.eval(xt) {
                if norm(rt) < (1.0 - 1e-4 * lambda) * norm(res) {
                    x = xt;
                    res = rt;
                    orbit = ot;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(StationaryError::Solver {
                    reason: "line search failed".into(),
                    trace: trace.clone(),
                });
            }
        }
        trace.push(NewtonStep { ln_h: x, residual_norm: norm(res), damping: lambda });
    }
    if norm(res) <= opts.tol {
        return Ok(NewtonOutcome { x, res, orbit, iterations: opts.max_iter });
    }
    Err(StationaryError::Solver {
        reason: format!("no convergence in {} iterations", opts.max_iter),
        trace: trace.clone(),
    })
}

/// The monotone increasing stationary point close to the Maxwell point.
pub fn solve_simple(
    model: &Model,
    eps: f64,
    r: f64,
    opts: &SolveOptions,
) -> Result<SolveReport, StationaryError> {
    solve_n_transition(model, eps, r, 1, opts)
}

/// The stationary point made of `n` monotone half-periods, starting with an
/// increasing one.
///
/// Each half-period covers length `2/n` and mass `2r/n`, so the conditions
/// are `nε I_0(Δ; ε) = 2` and `nε I_1(Δ; ε) = 2r`.
pub fn solve_n_transition(
    model: &Model,
    eps: f64,
    r: f64,
    n: usize,
    opts: &SolveOptions,
) -> Result<SolveReport, StationaryError> {
    assert!(n >= 1, "number of transitions must be positive");
    model.check_eps(eps).map_err(|e| StationaryError::Domain(e.to_string()))?;
    let mp = &model.maxwell;
    let delta = opts.r_margin * (mp.beta0 - mp.alpha0);
    if !(r >= mp.alpha0 + delta && r <= mp.beta0 - delta) {
        return Err(StationaryError::Domain(format!(
            "r = {r} outside the window [{}, {}]",
            mp.alpha0 + delta,
            mp.beta0 - delta
        )));
    }
    let sc = scaling(model, r)?;
    let guess = |e: f64| {
        let ne = n as f64 * e;
        [-sc.c1 / ne, -sc.c2 / ne]
    };
    let x0 = opts.initial_ln_h.unwrap_or_else(|| guess(eps));
    let sys = System { model, eps, r, n, quad_tol: opts.quad_tol };
    let mut trace = Vec::new();

    let outcome = match newton(&sys, x0, opts, &mut trace) {
        Ok(o) => o,
        Err(first) => continuation(model, eps, r, n, opts, &guess, &mut trace).map_err(|_| first)?,
    };

    let ne = n as f64 * eps;
    let k = [
        (outcome.x[0] + sc.c1 / ne) / sc.mu1,
        (outcome.x[1] + sc.c2 / ne) / sc.mu2,
    ];
    let energy = outcome.orbit.energy(eps, r, n, opts.quad_tol)?;
    Ok(SolveReport {
        eps,
        r,
        n_transitions: n,
        delta: outcome.orbit.pair(),
        ln_h: outcome.x,
        k,
        residuals: outcome.res,
        iterations: outcome.iterations,
        energy,
        tp: outcome.orbit.turning_points(),
        orbit: outcome.orbit,
    })
}

/// Solves at larger ε where the leading-order guess is good enough, then
/// walks ε back down geometrically.
fn continuation(
    model: &Model,
    eps: f64,
    r: f64,
    n: usize,
    opts: &SolveOptions,
    guess: &dyn Fn(f64) -> [f64; 2],
    trace: &mut Vec<NewtonStep>,
) -> Result<NewtonOutcome, StationaryError> {
    let f = opts.continuation_factor;
    let ceiling = 0.9 * model.eps_bound.f_bar;
    let mut ladder = vec![eps];
    let mut start = None;
    while ladder.len() <= opts.max_continuation {
        let e = ladder.last().unwrap() / f;
        if e >= ceiling {
            break;
        }
        ladder.push(e);
        let sys = System { model, eps: e, r, n, quad_tol: opts.quad_tol };
        if let Ok(o) = newton(&sys, guess(e), opts, trace) {
            start = Some(o);
            break;
        }
    }
    let mut current = start.ok_or_else(|| StationaryError::Solver {
        reason: "continuation found no starting point".into(),
        trace: trace.clone(),
    })?;
    let mut e_prev = ladder.pop().unwrap();
    while let Some(e) = ladder.pop() {
        let sys = System { model, eps: e, r, n, quad_tol: opts.quad_tol };
        // ln h scales like 1/ε.
        let x0 = [current.x[0] * e_prev / e, current.x[1] * e_prev / e];
        current = newton(&sys, x0, opts, trace)?;
        e_prev = e;
    }
    Ok(current)
}
