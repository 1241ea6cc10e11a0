//! Tanh-sinh quadrature for integrands with endpoint singularities.
//!
//! The substitution `x = tanh(π/2 · sinh τ)` clusters nodes double
//! exponentially at both ends of the interval. Integrands receive each node
//! together with its distances to the two endpoints, computed without
//! cancellation, so a caller whose integrand depends on `z - lo` or
//! `hi - z` can evaluate it to full relative precision even when the node
//! sits `1e-250` away from an endpoint.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

/// Largest level for which node tables are built.
pub const MAX_LEVELS: usize = 16;
/// Default number of halvings of the step size.
pub const DEFAULT_MAX_LEVELS: usize = 12;
/// Default relative tolerance between successive levels.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Levels below this are never accepted as converged.
const MIN_LEVEL: usize = 3;
/// Nodes closer than this (relative to the half-width) are dropped.
const TAIL_CUTOFF: f64 = 1e-280;
/// Nodes closer than this to an endpoint, in absolute terms, are dropped
/// to keep integrands away from subnormal arguments.
const DIST_FLOOR: f64 = 1e-290;

/// A quadrature node in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub z: f64,
    /// `z - lo`, accurate even when tiny.
    pub from_lo: f64,
    /// `hi - z`, accurate even when tiny.
    pub from_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Absolute difference between the last two levels.
    pub err_estimate: f64,
    pub levels_used: usize,
    pub converged: bool,
}

/// Result of integrating several integrands on a shared set of nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResultN<const N: usize> {
    pub values: [f64; N],
    pub err_estimates: [f64; N],
    pub levels_used: usize,
    pub converged: bool,
}

impl<const N: usize> QuadResultN<N> {
    pub fn component(&self, i: usize) -> QuadResult {
        QuadResult {
            value: self.values[i],
            err_estimate: self.err_estimates[i],
            levels_used: self.levels_used,
            converged: self.converged,
        }
    }
}

/// An integrand on `[lo, hi]` that may blow up like an inverse square root
/// at either endpoint.
pub struct SingularIntegrand<F> {
    pub lo: f64,
    pub hi: f64,
    pub integrand: F,
}

impl<F: Fn(Node) -> f64> SingularIntegrand<F> {
    pub fn new(lo: f64, hi: f64, integrand: F) -> Self {
        Self { lo, hi, integrand }
    }
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One abscissa of the reference rule on `[-1, 1]`, stored for `τ ≥ 0`.
#[derive(Debug, Clone, Copy)]
struct RefNode {
    /// `1 - x`.
    comp: f64,
    weight: f64,
}

/// Nodes added at each level; level 0 holds `τ = 0, 1, 2, …`.
fn tables() -> &'static [Vec<RefNode>] {
    static TABLES: OnceLock<Vec<Vec<RefNode>>> = OnceLock::new();
    TABLES.get_or_init(|| {
        (0..=MAX_LEVELS)
            .map(|level| {
                let h = 0.5f64.powi(level as i32);
                let (start, stride) = if level == 0 { (0usize, 1usize) } else { (1, 2) };
                let mut nodes = Vec::new();
                let mut k = start;
                loop {
                    let tau = k as f64 * h;
                    let u = FRAC_PI_2 * tau.sinh();
                    let cu = u.cosh();
                    let comp = (-u).exp() / cu;
                    if comp < TAIL_CUTOFF {
                        break;
                    }
                    let weight = FRAC_PI_2 * tau.cosh() / (cu * cu);
                    nodes.push(RefNode { comp, weight });
                    k += stride;
                }
                nodes
            })
            .collect()
    })
}

/// Integrates `q` to relative accuracy `rel_tol`, halving the step at most
/// `max_levels` times.
pub fn integrate_singular<F>(q: &SingularIntegrand<F>, rel_tol: f64, max_levels: usize) -> QuadResult
where
    F: Fn(Node) -> f64,
{
    integrate_singular_n(q.lo, q.hi, |node| [(q.integrand)(node)], rel_tol, max_levels).component(0)
}

/// Integrates `N` integrands at once on shared nodes. Convergence requires
/// every component to settle.
pub fn integrate_singular_n<const N: usize, F>(
    lo: f64,
    hi: f64,
    f: F,
    rel_tol: f64,
    max_levels: usize,
) -> QuadResultN<N>
where
    F: Fn(Node) -> [f64; N],
{
    assert!(lo < hi, "integrate_singular needs lo < hi, got [{lo}, {hi}]");
    let max_levels = max_levels.min(MAX_LEVELS);
    let half = 0.5 * (hi - lo);
    let tables = tables();

    let mut sum = [Neumaier::default(); N];
    let mut abs_sum = [0.0; N];
    let mut prev = [f64::NAN; N];
    let mut estimate = [0.0; N];
    let mut diff = [f64::INFINITY; N];

    for level in 0..=max_levels {
        let h = 0.5f64.powi(level as i32);
        for (i, node) in tables[level].iter().enumerate() {
            let d = half * node.comp;
            if d < DIST_FLOOR {
                break;
            }
            let far = half * (2.0 - node.comp);
            let right = f(Node { z: hi - d, from_lo: far, from_hi: d });
            let centre = level == 0 && i == 0;
            let left = if centre {
                [0.0; N]
            } else {
                f(Node { z: lo + d, from_lo: d, from_hi: far })
            };
            for c in 0..N {
                let s = right[c] + left[c];
                sum[c].add(node.weight * s);
                abs_sum[c] += node.weight * (right[c].abs() + left[c].abs());
            }
        }
        let mut settled = level >= MIN_LEVEL;
        for c in 0..N {
            estimate[c] = half * h * sum[c].total();
            diff[c] = (estimate[c] - prev[c]).abs();
            let scale = half * h * abs_sum[c];
            if !(diff[c] <= rel_tol * scale) {
                settled = false;
            }
            prev[c] = estimate[c];
        }
        if settled {
            return QuadResultN {
                values: estimate,
                err_estimates: diff,
                levels_used: level,
                converged: true,
            };
        }
    }
    QuadResultN {
        values: estimate,
        err_estimates: diff,
        levels_used: max_levels,
        converged: false,
    }
}
