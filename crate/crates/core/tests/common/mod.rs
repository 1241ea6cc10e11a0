//! Independent reference computations for the integration tests.

#![allow(dead_code)]

use mcgl::potential::PotentialSpec;

/// Gauss–Legendre nodes and weights on `[-1, 1]` from Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)], panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        total += rule.iter().map(|&(x, w)| w * r * f(c + r * x)).sum::<f64>();
    }
    total
}

/// Plain bisection to full precision.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Wells and saddle of `F - σz` for a double-well quartic whose spinodal
/// interval lies inside `[lo, hi]`, located by scanning `F' - σ`.
pub fn critical_points(p: &PotentialSpec, sigma: f64, lo: f64, hi: f64) -> [f64; 3] {
    let g = |z: f64| p.df(z) - sigma;
    let n = 4000;
    let mut roots = Vec::new();
    for k in 0..n {
        let a = lo + (hi - lo) * k as f64 / n as f64;
        let b = lo + (hi - lo) * (k + 1) as f64 / n as f64;
        if g(a) == 0.0 {
            roots.push(a);
        } else if g(a) * g(b) < 0.0 {
            roots.push(bisect(g, a, b));
        }
    }
    assert_eq!(roots.len(), 3, "expected three critical points, got {roots:?}");
    [roots[0], roots[1], roots[2]]
}

/// `(I_0, I_1)` for the pair `(σ, b)` by splitting at the saddle and
/// substituting `z = z_i ± w²` at each turning point. `split` moves the
/// breakpoint away from the saddle as a fraction of the orbit.
pub fn moments(p: &PotentialSpec, sigma: f64, b: f64, eps: f64, split: f64, lo: f64, hi: f64) -> (f64, f64) {
    let [alpha, zeta, beta] = critical_points(p, sigma, lo, hi);
    let f = |z: f64| p.f(z) - sigma * z - b;
    let z1 = bisect(f, alpha, zeta);
    let z2 = bisect(f, zeta, beta);
    let zm = z1 + split * (z2 - z1);
    let e2 = eps * eps;
    // f(z) = (z - z_i) D(z, z_i) once b is replaced by Φ_σ(z_i).
    let mut c = p.coeffs().to_vec();
    c[1] -= sigma;
    let from = |z0: f64, s: f64| s * divided_difference(&c, z0 + s, z0);
    let weight = |v: f64| (1.0 - e2 * v) / (v * (2.0 - e2 * v)).sqrt();
    let left = |w: f64| weight(from(z1, w * w));
    let right = |w: f64| weight(from(z2, -w * w));
    let rule = gauss_legendre(48);
    let w1 = (zm - z1).sqrt();
    let w2 = (z2 - zm).sqrt();
    let i0 = gl_integrate(|w| 2.0 * w * left(w), 0.0, w1, &rule, 8)
        + gl_integrate(|w| 2.0 * w * right(w), 0.0, w2, &rule, 8);
    let i1 = gl_integrate(|w| 2.0 * w * (z1 + w * w) * left(w), 0.0, w1, &rule, 8)
        + gl_integrate(|w| 2.0 * w * (z2 - w * w) * right(w), 0.0, w2, &rule, 8);
    (i0, i1)
}

/// `(P(z) - P(z0))/(z - z0)` for ascending coefficients, summed term by term.
pub fn divided_difference(c: &[f64], z: f64, z0: f64) -> f64 {
    let mut total = 0.0;
    for (k, &a) in c.iter().enumerate().skip(1) {
        let mut s = 0.0;
        for j in 0..k {
            s += z.powi(j as i32) * z0.powi((k - 1 - j) as i32);
        }
        total += a * s;
    }
    total
}

/// Pairs on a `5 × 5` grid of the admissible set: five tilts, and `b` at
/// fixed fractions between the higher well and the saddle.
pub fn admissible_grid(p: &PotentialSpec, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &sigma in &[-0.2, -0.1, 0.0, 0.1, 0.2] {
        let [a, z, c] = critical_points(p, sigma, lo, hi);
        let phi = |u: f64| p.f(u) - sigma * u;
        let wells = phi(a).max(phi(c));
        for &theta in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            out.push((sigma, wells + theta * (phi(z) - wells)));
        }
    }
    out
}
