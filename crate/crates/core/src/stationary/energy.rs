//! Energy of stationary points: the expansion about the Maxwell point and
//! the ranking against other critical points.

use serde::Serialize;

use super::{solve_n_transition, solve_simple, SolveOptions, StationaryError};
use crate::phase_plane::{c_eps, Model};

/// `E0 = base + correction + defect` with `base = 2(σ0 r + b0)` and
/// `correction = ε c_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyExpansion {
    pub e0: f64,
    pub base: f64,
    pub correction: f64,
    pub defect: f64,
}

pub fn maxwell_energy_expansion(
    model: &Model,
    eps: f64,
    r: f64,
    opts: &SolveOptions,
) -> Result<EnergyExpansion, StationaryError> {
    let report = solve_simple(model, eps, r, opts)?;
    let mp = &model.maxwell;
    let base = 2.0 * (mp.sigma0 * r + mp.b0);
    let correction = eps * c_eps(model, eps, opts.quad_tol)?;
    Ok(EnergyExpansion {
        e0: report.energy,
        base,
        correction,
        defect: report.energy - base - correction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    /// `maxwell`, `constant` or `transition-<n>`.
    pub label: String,
    pub energy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    /// Successful entries by increasing energy, then failures.
    pub entries: Vec<RankEntry>,
    /// Whether the Maxwell solution is strictly below every other entry.
    pub maxwell_first: bool,
}

/// Energies of the Maxwell solution, the constant `u ≡ r` and the
/// `n`-transition solutions for `n = 2..=n_max`.
pub fn rank_energies(
    model: &Model,
    eps: f64,
    r: f64,
    n_max: usize,
    opts: &SolveOptions,
) -> Ranking {
    let mut entries = Vec::new();
    let mut push = |label: String, res: Result<f64, StationaryError>| {
        entries.push(match res {
            Ok(e) => RankEntry { label, energy: Some(e), error: None },
            Err(err) => RankEntry { label, energy: None, error: Some(err.to_string()) },
        })
    };
    push("maxwell".into(), solve_simple(model, eps, r, opts).map(|s| s.energy));
    push("constant".into(), Ok(2.0 * model.potential.f(r)));
    for n in 2..=n_max {
        push(
            format!("transition-{n}"),
            solve_n_transition(model, eps, r, n, opts).map(|s| s.energy),
        );
    }
    entries.sort_by(|a, b| match (a.energy, b.energy) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let maxwell_first = entries[0].label == "maxwell"
        && entries[0].energy.is_some()
        && entries.get(1).is_none_or(|e| e.energy.is_none_or(|v| v > entries[0].energy.unwrap()));
    Ranking { entries, maxwell_first }
}
