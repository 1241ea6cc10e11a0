//! Dense polynomials in ascending coefficient order.

/// Evaluates `c[0] + c[1] x + … ` by Horner's rule.
pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect()
}

/// Coefficients of `t ↦ p(x0 + t)`.
pub fn taylor_shift(c: &[f64], x0: f64) -> Vec<f64> {
    let mut d = c.to_vec();
    let n = d.len();
    // Repeated synthetic division by (x - x0).
    for i in 0..n {
        for j in (i..n - 1).rev() {
            d[j] += x0 * d[j + 1];
        }
    }
    d
}

/// Coefficients of `t ↦ p(-t)`.
pub fn reflect(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .map(|(k, &a)| if k % 2 == 1 { -a } else { a })
        .collect()
}
