//! Stationary points of the constrained energy: the Maxwell solution,
//! multi-transition solutions, their profiles, energies and stability.

mod energy;
mod limit;
mod profile;
mod solve;
mod stability;

use thiserror::Error;

use crate::phase_plane::PhaseError;
use crate::potential::PotentialError;

pub use energy::{maxwell_energy_expansion, rank_energies, EnergyExpansion, RankEntry, Ranking};
pub use limit::{convergence_metrics, limit_eval, limit_profile, ConvergenceMetrics, LimitProfile};
pub use profile::{
    energy_of_profile, reconstruct_profile, reconstruct_profile_at, reversal, uniform_grid, Orientation, Profile,
};
pub use solve::{
    pair_from_lnh, scaling, solve_n_transition, solve_simple, NewtonStep, SolveOptions,
    SolveReport, SolverScaling,
};
pub use stability::{destabilize_nonmonotone, second_variation, Destabilization, MEAN_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StationaryError {
    #[error("parameters out of domain: {0}")]
    Domain(String),
    #[error("solver failed: {reason}")]
    Solver { reason: String, trace: Vec<NewtonStep> },
    #[error("profile error: {0}")]
    Profile(String),
    #[error("perturbation mean {0:e} is not zero")]
    NonZeroMean(f64),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}
