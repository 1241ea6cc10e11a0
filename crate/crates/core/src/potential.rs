//! The free energy density `F`, its Gibbs function and the equal-area
//! (Maxwell) construction.

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::poly::{derivative, horner};
use crate::numerics::{find_root, RootError};

pub const DEFAULT_DOMAIN_FLOOR: f64 = 1e-6;
pub const DEFAULT_WINDOW_END: f64 = 6.0;
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Number of probes used when checking the sign structure of `F''`.
pub const HYPOTHESIS_PROBES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("derivative order {0} is not supported (0..=3)")]
    InvalidOrder(usize),
    #[error("u = {u} is outside the admissible domain u > 0")]
    OutsideDomain { u: f64 },
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("double-well hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("sigma = {sigma} outside the spinodal range ({lo}, {hi})")]
    SigmaOutOfRange { sigma: f64, lo: f64, hi: f64 },
    #[error("degenerate potential: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// Inflection points of `F` and the corresponding range of slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinodalData {
    pub alpha_bar: f64,
    pub beta_bar: f64,
    /// `F'(beta_bar)`.
    pub sigma_lo: f64,
    /// `F'(alpha_bar)`.
    pub sigma_hi: f64,
}

/// The three roots of `F'(z) = σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalTriple {
    pub alpha_sigma: f64,
    pub zeta_sigma: f64,
    pub beta_sigma: f64,
}

/// Equal-depth configuration of the two wells of `Φ_σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxwellPoint {
    pub sigma0: f64,
    pub b0: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub zeta0: f64,
}

/// A polynomial free energy on the window `[domain_floor, window_end]`.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    coeffs: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
    domain_floor: f64,
    window_end: f64,
    spinodal: OnceLock<Result<SpinodalData, PotentialError>>,
}

impl PartialEq for PotentialSpec {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
            && self.domain_floor == other.domain_floor
            && self.window_end == other.window_end
    }
}

impl PotentialSpec {
    /// `F(u) = ((u-2)^2 - 1)^2 / 4 + t u`, wells at 1 and 3.
    pub fn tilted_quartic(tilt: f64) -> Self {
        Self::build(
            vec![2.25, -6.0 + tilt, 5.5, -2.0, 0.25],
            DEFAULT_DOMAIN_FLOOR,
            DEFAULT_WINDOW_END,
        )
    }

    pub fn symmetric_quartic() -> Self {
        Self::tilted_quartic(0.0)
    }

    /// A user polynomial, coefficients in ascending degree.
    ///
    /// Only structural checks happen here; the double-well hypotheses are
    /// reported by [`PotentialSpec::hypothesis_violations`] and enforced by
    /// the operations that need them.
    pub fn polynomial(
        coeffs: Vec<f64>,
        domain_floor: f64,
        window_end: f64,
    ) -> Result<Self, PotentialError> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(PotentialError::InvalidPolynomial("non-finite coefficient".into()));
        }
        let degree = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
        if degree < 4 {
            return Err(PotentialError::InvalidPolynomial(format!(
                "degree {degree} < 4"
            )));
        }
        if !(domain_floor > 0.0) || !(window_end > domain_floor) {
            return Err(PotentialError::InvalidPolynomial(format!(
                "window [{domain_floor}, {window_end}] must satisfy 0 < floor < end"
            )));
        }
        let mut coeffs = coeffs;
        coeffs.truncate(degree + 1);
        Ok(Self::build(coeffs, domain_floor, window_end))
    }

    fn build(coeffs: Vec<f64>, domain_floor: f64, window_end: f64) -> Self {
        let d1 = derivative(&coeffs);
        let d2 = derivative(&d1);
        let d3 = derivative(&d2);
        Self {
            coeffs,
            d1,
            d2,
            d3,
            domain_floor,
            window_end,
            spinodal: OnceLock::new(),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain_floor(&self) -> f64 {
        self.domain_floor
    }

    pub fn window_end(&self) -> f64 {
        self.window_end
    }

    /// `F^(order)(u)` for `order` in `0..=3`.
    pub fn eval(&self, u: f64, order: usize) -> Result<f64, PotentialError> {
        if order > 3 {
            return Err(PotentialError::InvalidOrder(order));
        }
        if !(u > 0.0) {
            return Err(PotentialError::OutsideDomain { u });
        }
        Ok(match order {
            0 => self.f(u),
            1 => self.df(u),
            2 => self.d2f(u),
            _ => self.d3f(u),
        })
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        horner(&self.coeffs, u)
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        horner(&self.d1, u)
    }

    #[inline]
    pub fn d2f(&self, u: f64) -> f64 {
        horner(&self.d2, u)
    }

    #[inline]
    pub fn d3f(&self, u: f64) -> f64 {
        horner(&self.d3, u)
    }

    /// `(F(u), F'(u))` in one Horner pass.
    #[inline]
    pub fn f_and_df(&self, u: f64) -> (f64, f64) {
        let mut f = 0.0;
        let mut df = 0.0;
        for &a in self.coeffs.iter().rev() {
            df = df * u + f;
            f = f * u + a;
        }
        (f, df)
    }

    /// `Φ_σ(z) = F(z) - σz` and its first two derivatives.
    pub fn gibbs(&self, sigma: f64, z: f64, order: usize) -> Result<f64, PotentialError> {
        match order {
            0 => self.eval(z, 0).map(|v| v - sigma * z),
            1 => self.eval(z, 1).map(|v| v - sigma),
            2 => self.eval(z, 2),
            _ => Err(PotentialError::InvalidOrder(order)),
        }
    }

    /// Coefficients of `Φ_σ`.
    pub fn gibbs_coeffs(&self, sigma: f64) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        c[1] -= sigma;
        c
    }

    /// Human-readable list of violated double-well hypotheses (empty when
    /// the potential is valid).
    pub fn hypothesis_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self.spinodal() {
            Err(e) => out.push(e.to_string()),
            Ok(s) => {
                let left = self.df(self.domain_floor);
                if !(left < s.sigma_lo) {
                    out.push(format!(
                        "F'(floor) = {left} is not below F'(beta_bar) = {}",
                        s.sigma_lo
                    ));
                }
                let right = self.df(self.window_end);
                if !(right > s.sigma_hi) {
                    out.push(format!(
                        "F'(window end) = {right} does not exceed F'(alpha_bar) = {}",
                        s.sigma_hi
                    ));
                }
            }
        }
        out
    }

    /// Fails with the first violated hypothesis.
    pub fn validate(&self) -> Result<SpinodalData, PotentialError> {
        let s = self.spinodal()?;
        if let Some(v) = self.hypothesis_violations().into_iter().next() {
            return Err(PotentialError::Hypothesis(v));
        }
        Ok(s)
    }

    /// Roots of `F''` in the working window.
    pub fn spinodal(&self) -> Result<SpinodalData, PotentialError> {
        self.spinodal
            .get_or_init(|| self.compute_spinodal())
            .clone()
    }

    fn compute_spinodal(&self) -> Result<SpinodalData, PotentialError> {
        let (lo, hi) = (self.domain_floor, self.window_end);
        let n = HYPOTHESIS_PROBES;
        let probe = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let mut changes = Vec::new();
        let mut prev = self.d2f(lo);
        if !(prev > 0.0) {
            return Err(PotentialError::Hypothesis(format!(
                "F'' = {prev} is not positive at the domain floor {lo}"
            )));
        }
        for i in 1..n {
            let u = probe(i);
            let cur = self.d2f(u);
            if cur == 0.0 || cur.signum() != prev.signum() {
                changes.push((probe(i - 1), u));
            }
            if cur != 0.0 {
                prev = cur;
            }
        }
        if changes.len() != 2 {
            return Err(PotentialError::Hypothesis(format!(
                "F'' changes sign {} times in [{lo}, {hi}], expected exactly 2",
                changes.len()
            )));
        }
        let alpha_bar = find_root(|u| self.d2f(u), changes[0].0, changes[0].1, 0.0)?;
        let beta_bar = find_root(|u| self.d2f(u), changes[1].0, changes[1].1, 0.0)?;
        Ok(SpinodalData {
            alpha_bar,
            beta_bar,
            sigma_lo: self.df(beta_bar),
            sigma_hi: self.df(alpha_bar),
        })
    }

    /// The roots `α_σ < ζ_σ < β_σ` of `F'(z) = σ`.
    pub fn critical_points(&self, sigma: f64, tol: f64) -> Result<CriticalTriple, PotentialError> {
        let s = self.spinodal()?;
        if !(sigma > s.sigma_lo && sigma < s.sigma_hi) {
            return Err(PotentialError::SigmaOutOfRange { sigma, lo: s.sigma_lo, hi: s.sigma_hi });
        }
        let g = |z: f64| self.df(z) - sigma;
        Ok(CriticalTriple {
            alpha_sigma: find_root(g, self.domain_floor, s.alpha_bar, tol)?,
            zeta_sigma: find_root(g, s.alpha_bar, s.beta_bar, tol)?,
            beta_sigma: find_root(g, s.beta_bar, self.window_end, tol)?,
        })
    }

    /// Depth difference of the wells, `Φ_σ(β_σ) - Φ_σ(α_σ)`. Strictly
    /// decreasing in σ with derivative `α_σ - β_σ`.
    pub fn well_gap(&self, sigma: f64) -> Result<f64, PotentialError> {
        let c = self.critical_points(sigma, 0.0)?;
        Ok(self.f(c.beta_sigma) - self.f(c.alpha_sigma) - sigma * (c.beta_sigma - c.alpha_sigma))
    }

    /// Slope σ at which the two wells of `Φ_σ` have equal depth.
    pub fn maxwell_point(&self, tol: f64) -> Result<MaxwellPoint, PotentialError> {
        let s = self.validate()?;
        let delta = 1e-9 * (s.sigma_hi - s.sigma_lo);
        let (lo, hi) = (s.sigma_lo + delta, s.sigma_hi - delta);
        let (glo, ghi) = (self.well_gap(lo)?, self.well_gap(hi)?);
        if !(glo > 0.0 && ghi < 0.0) {
            return Err(PotentialError::Degenerate(format!(
                "well gap does not change sign on the spinodal range: g({lo}) = {glo}, g({hi}) = {ghi}"
            )));
        }
        let mut failure = None;
        let sigma0 = find_root(
            |sigma| match self.well_gap(sigma) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let sigma0 = sigma0?;
        let c = self.critical_points(sigma0, 0.0)?;
        let phi = |z: f64| self.f(z) - sigma0 * z;
        Ok(MaxwellPoint {
            sigma0,
            b0: 0.5 * (phi(c.alpha_sigma) + phi(c.beta_sigma)),
            alpha0: c.alpha_sigma,
            beta0: c.beta_sigma,
            zeta0: c.zeta_sigma,
        })
    }
}
