//! Finite-volume Cahn–Hilliard flow with mean-curvature diffusion on
//! `[-1, 1]`:
//!
//! `u_t = (D(u) μ_x)_x`, `μ = -(ε² u_x / √(1 + ε⁴ u_x²))_x + F'(u)`,
//!
//! with zero flux and zero gradient at both ends. Cells are uniform; `μ` is
//! the exact gradient of the discrete energy
//! `Σ_faces dx Q(ε² g)/ε² + Σ_cells dx F(u)`, so forward Euler steps below
//! the stability limit dissipate it. Every step is checked and retried with
//! half the step when the energy grows.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::potential::PotentialSpec;

/// Smallest step before the run is declared stiff.
pub const MIN_DT: f64 = 1e-14;
/// Relative energy growth tolerated in one step.
pub const ENERGY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation setup: {0}")]
    InvalidConfig(String),
    #[error("time step fell below {MIN_DT:e} at t = {t} (dt = {dt:e})")]
    Stiffness { t: f64, dt: f64 },
}

/// Concentration-dependent mobility `D(u) > 0`.
#[derive(Clone)]
pub enum Mobility {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Mobility {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Mobility::Function(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Mobility::Constant(d) => *d,
            Mobility::Function(f) => f(u),
        }
    }
}

impl Default for Mobility {
    fn default() -> Self {
        Mobility::Constant(1.0)
    }
}

impl fmt::Debug for Mobility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mobility::Constant(d) => write!(f, "Constant({d})"),
            Mobility::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_cells: usize,
    pub eps: f64,
    pub potential: PotentialSpec,
    pub mobility: Mobility,
    /// First step tried; clipped to the stability bound.
    pub dt_init: f64,
    pub t_end: f64,
    /// Fraction of the explicit stability bound `dx⁴/(8ε² max D)`.
    pub safety: f64,
    /// Spacing of trace samples in time.
    pub sample_interval: f64,
}

impl SimConfig {
    pub fn new(n_cells: usize, eps: f64, potential: PotentialSpec, t_end: f64) -> Self {
        Self {
            n_cells,
            eps,
            potential,
            mobility: Mobility::default(),
            dt_init: f64::INFINITY,
            t_end,
            safety: 0.9,
            sample_interval: t_end / 200.0,
        }
    }

    pub fn dx(&self) -> f64 {
        2.0 / self.n_cells as f64
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.n_cells < 16 {
            return Err(SimError::InvalidConfig(format!("n_cells = {} < 16", self.n_cells)));
        }
        if !(self.eps > 0.0) {
            return Err(SimError::InvalidConfig(format!("eps = {} must be positive", self.eps)));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(SimError::InvalidConfig(format!("safety = {} outside (0, 1]", self.safety)));
        }
        if !(self.t_end >= 0.0) || !(self.sample_interval > 0.0) {
            return Err(SimError::InvalidConfig("t_end and sample_interval must be positive".into()));
        }
        Ok(())
    }
}

/// Cell centres of the uniform grid on `[-1, 1]`.
pub fn cell_centres(n_cells: usize) -> Vec<f64> {
    let dx = 2.0 / n_cells as f64;
    (0..n_cells).map(|i| -1.0 + (i as f64 + 0.5) * dx).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
    pub dx: f64,
    pub mass0: f64,
    pub energy_trace: Vec<TraceSample>,
    pub energy: f64,
    pub max_dt_used: f64,
    pub steps: u64,
    pub rejected_steps: u64,
    /// Largest `(E_new - E_old)/|E_old|` over accepted steps.
    pub max_rel_increase: f64,
}

impl SimState {
    pub fn new(cfg: &SimConfig, u: Vec<f64>) -> Result<Self, SimError> {
        cfg.validate()?;
        if u.len() != cfg.n_cells {
            return Err(SimError::InvalidConfig(format!(
                "initial data has {} cells, config has {}",
                u.len(),
                cfg.n_cells
            )));
        }
        let dx = cfg.dx();
        let m = mass(dx, &u);
        let e = discrete_energy(cfg, &u);
        Ok(Self {
            t: 0.0,
            u,
            dx,
            mass0: m,
            energy_trace: vec![TraceSample { t: 0.0, mass: m, energy: e }],
            energy: e,
            max_dt_used: 0.0,
            steps: 0,
            rejected_steps: 0,
            max_rel_increase: f64::NEG_INFINITY,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub mass: f64,
    pub energy: f64,
    pub max_dt_used: f64,
}

pub fn mass(dx: f64, u: &[f64]) -> f64 {
    dx * u.iter().sum::<f64>()
}

/// `Σ_faces dx Q(ε² g)/ε² + Σ_cells dx F(u)` with `g` the face difference
/// quotient; the boundary faces carry no gradient.
pub fn discrete_energy(cfg: &SimConfig, u: &[f64]) -> f64 {
    let mut ws = Workspace::new(u.len());
    ws.load(&Kernel::new(cfg), u)
}

/// `μ_i = -(q_{i+1/2} - q_{i-1/2})/dx + F'(u_i)` with
/// `q = ε² g/√(1 + ε⁴ g²)` and `q = 0` on the boundary faces.
pub fn chemical_potential(cfg: &SimConfig, u: &[f64]) -> Vec<f64> {
    let mut ws = Workspace::new(u.len());
    ws.load(&Kernel::new(cfg), u);
    ws.mu
}

pub fn diagnostics(state: &SimState) -> Diagnostics {
    Diagnostics {
        mass: mass(state.dx, &state.u),
        energy: state.energy,
        max_dt_used: state.max_dt_used,
    }
}

/// Grid constants shared by the inner loops.
struct Kernel<'a> {
    cfg: &'a SimConfig,
    dx: f64,
    inv_dx: f64,
    e2: f64,
}

impl<'a> Kernel<'a> {
    fn new(cfg: &'a SimConfig) -> Self {
        let dx = cfg.dx();
        Self { cfg, dx, inv_dx: 1.0 / dx, e2: cfg.eps * cfg.eps }
    }

    /// Fills the padded face array `q` (zero on both boundary faces) and
    /// `mu`; returns the discrete energy. `dens` is scratch of length `n`.
    fn faces_and_mu(&self, u: &[f64], q: &mut [f64], mu: &mut [f64], dens: &mut [f64]) -> f64 {
        let n = u.len();
        let (inv_dx, e2) = (self.inv_dx, self.e2);
        let (left, right) = (&u[..n - 1], &u[1..]);
        let inner = &mut q[1..n];
        let dens_faces = &mut dens[..n - 1];
        for f in 0..n - 1 {
            let g = (right[f] - left[f]) * inv_dx;
            let s = e2 * g;
            let root = (1.0 + s * s).sqrt();
            // q = s/root and Q(s)/ε² = s g/(root + 1) from one division.
            let inv = 1.0 / (root * (root + 1.0));
            inner[f] = s * (root + 1.0) * inv;
            dens_faces[f] = s * g * root * inv;
        }
        let grad = sum4(&dens[..n - 1]);
        let c = self.cfg.potential.coeffs();
        let pot = match c.len() {
            5 => potential_terms::<5>(c.try_into().unwrap(), u, q, mu, dens, inv_dx),
            6 => potential_terms::<6>(c.try_into().unwrap(), u, q, mu, dens, inv_dx),
            7 => potential_terms::<7>(c.try_into().unwrap(), u, q, mu, dens, inv_dx),
            8 => potential_terms::<8>(c.try_into().unwrap(), u, q, mu, dens, inv_dx),
            _ => {
                for (i, (m, &ui)) in mu.iter_mut().zip(u).enumerate() {
                    let (fv, dfv) = self.cfg.potential.f_and_df(ui);
                    dens[i] = fv;
                    *m = dfv - (q[i + 1] - q[i]) * inv_dx;
                }
                sum4(dens)
            }
        };
        self.dx * (grad + pot)
    }
}

/// `μ` from the padded faces and `Σ F(u_i)`, with the polynomial unrolled.
#[inline(always)]
fn potential_terms<const N: usize>(
    c: [f64; N],
    u: &[f64],
    q: &[f64],
    mu: &mut [f64],
    fvals: &mut [f64],
    inv_dx: f64,
) -> f64 {
    let n = u.len();
    let (mu, fvals, ql, qr) = (&mut mu[..n], &mut fvals[..n], &q[..n], &q[1..n + 1]);
    for i in 0..n {
        let ui = u[i];
        let mut f = 0.0;
        let mut df = 0.0;
        for k in (0..N).rev() {
            df = df * ui + f;
            f = f * ui + c[k];
        }
        fvals[i] = f;
        mu[i] = df - (qr[i] - ql[i]) * inv_dx;
    }
    sum4(fvals)
}

/// Sum with four interleaved accumulators.
#[inline(always)]
fn sum4(xs: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = xs.chunks_exact(4);
    let rest: f64 = chunks.remainder().iter().sum();
    for c in chunks {
        for k in 0..4 {
            acc[k] += c[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + rest
}

/// Buffers shared between steps. Face arrays hold `n + 1` entries with the
/// two boundary faces at the ends.
struct Workspace {
    q: Vec<f64>,
    mu: Vec<f64>,
    flux: Vec<f64>,
    u_new: Vec<f64>,
    q_new: Vec<f64>,
    mu_new: Vec<f64>,
    dens: Vec<f64>,
    max_d: f64,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            q: vec![0.0; n + 1],
            mu: vec![0.0; n],
            flux: vec![0.0; n + 1],
            u_new: vec![0.0; n],
            q_new: vec![0.0; n + 1],
            mu_new: vec![0.0; n],
            dens: vec![0.0; n],
            max_d: 0.0,
        }
    }

    /// Fills `q` and `mu` for `u`; returns the discrete energy.
    fn load(&mut self, kernel: &Kernel, u: &[f64]) -> f64 {
        kernel.faces_and_mu(u, &mut self.q, &mut self.mu, &mut self.dens)
    }
}

struct Stepper<'a> {
    kernel: Kernel<'a>,
    ws: Workspace,
    dt: f64,
}

impl<'a> Stepper<'a> {
    fn new(cfg: &'a SimConfig, state: &SimState) -> Self {
        let kernel = Kernel::new(cfg);
        let mut ws = Workspace::new(state.u.len());
        ws.load(&kernel, &state.u);
        Self { kernel, ws, dt: cfg.dt_init }
    }

    fn bound(&self) -> f64 {
        let k = &self.kernel;
        k.cfg.safety * k.dx.powi(4) / (8.0 * k.e2 * self.ws.max_d)
    }

    /// Interior face fluxes `D(ū) Δμ/dx` for the current state.
    fn fluxes(&mut self, u: &[f64]) {
        let inv_dx = self.kernel.inv_dx;
        let ws = &mut self.ws;
        let n = u.len();
        let faces = ws.flux[1..n].iter_mut().zip(ws.mu.windows(2));
        match &self.kernel.cfg.mobility {
            Mobility::Constant(d) => {
                let c = d * inv_dx;
                for (fl, m) in faces {
                    *fl = c * (m[1] - m[0]);
                }
                ws.max_d = *d;
            }
            Mobility::Function(mob) => {
                let mut max_d: f64 = f64::NEG_INFINITY;
                for ((fl, m), w) in faces.zip(u.windows(2)) {
                    let d = mob(0.5 * (w[0] + w[1]));
                    max_d = max_d.max(d);
                    *fl = d * (m[1] - m[0]) * inv_dx;
                }
                ws.max_d = max_d;
            }
        }
    }

    /// Advances by at most `limit`; returns the step taken.
    fn advance(&mut self, state: &mut SimState, limit: f64) -> Result<f64, SimError> {
        self.fluxes(&state.u);
        if !(self.ws.max_d > 0.0) {
            return Err(SimError::InvalidConfig("mobility must be positive".into()));
        }
        let bound = self.bound();
        let mut dt = self.dt.min(bound).min(limit);
        let n = state.u.len();
        loop {
            if dt < MIN_DT && dt < limit {
                return Err(SimError::Stiffness { t: state.t, dt });
            }
            let ws = &mut self.ws;
            let c = dt * self.kernel.inv_dx;
            let (u_new, u_old) = (&mut ws.u_new[..n], &state.u[..n]);
            let (fl, fr) = (&ws.flux[..n], &ws.flux[1..n + 1]);
            for i in 0..n {
                u_new[i] = u_old[i] + c * (fr[i] - fl[i]);
            }
            let e_new = self.kernel.faces_and_mu(&ws.u_new, &mut ws.q_new, &mut ws.mu_new, &mut ws.dens);
            let growth = e_new - state.energy;
            if growth <= ENERGY_SLACK * state.energy.abs() {
                std::mem::swap(&mut state.u, &mut ws.u_new);
                std::mem::swap(&mut ws.q, &mut ws.q_new);
                std::mem::swap(&mut ws.mu, &mut ws.mu_new);
                let rel = growth / state.energy.abs().max(f64::MIN_POSITIVE);
                state.max_rel_increase = state.max_rel_increase.max(rel);
                state.energy = e_new;
                state.t += dt;
                state.steps += 1;
                state.max_dt_used = state.max_dt_used.max(dt);
                // Recover towards the bound after a rejection.
                self.dt = if dt < bound { (2.0 * dt).min(bound) } else { bound };
                if dt == limit {
                    self.dt = self.dt.max(bound);
                }
                return Ok(dt);
            }
            state.rejected_steps += 1;
            dt *= 0.5;
        }
    }
}

/// One accepted explicit step.
pub fn step(cfg: &SimConfig, state: &SimState) -> Result<SimState, SimError> {
    let mut next = state.clone();
    let mut stepper = Stepper::new(cfg, state);
    stepper.advance(&mut next, f64::INFINITY)?;
    Ok(next)
}

/// Integrates from `u_init` to `cfg.t_end`, sampling mass and energy every
/// `cfg.sample_interval`.
pub fn run(cfg: &SimConfig, u_init: Vec<f64>) -> Result<SimState, SimError> {
    let mut state = SimState::new(cfg, u_init)?;
    let mut stepper = Stepper::new(cfg, &state);
    let mut next_sample = cfg.sample_interval;
    while state.t < cfg.t_end {
        let target = next_sample.min(cfg.t_end);
        let limit = target - state.t;
        stepper.advance(&mut state, limit)?;
        if state.t >= target || target - state.t <= 1e-12 * cfg.t_end {
            state.t = target;
            state.energy_trace.push(TraceSample {
                t: state.t,
                mass: mass(state.dx, &state.u),
                energy: state.energy,
            });
            next_sample += cfg.sample_interval;
        }
    }
    Ok(state)
}
