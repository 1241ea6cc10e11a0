//! Exit codes.

use mcgl::cahn_hilliard::SimError;
use mcgl::phase_plane::PhaseError;
use mcgl::potential::PotentialError;
use mcgl::stationary::StationaryError;

pub const INVALID_POTENTIAL: i32 = 2;
pub const OUT_OF_DOMAIN: i32 = 3;
pub const SOLVER_FAILURE: i32 = 4;
pub const STIFFNESS: i32 = 5;
/// Configuration or I/O problems.
pub const OTHER: i32 = 1;

/// Parameters rejected by the front end itself.
#[derive(Debug, thiserror::Error)]
#[error("parameters out of domain: {0}")]
pub struct OutOfDomain(pub String);

pub fn code_for_potential(e: &PotentialError) -> i32 {
    match e {
        PotentialError::OutsideDomain { .. } | PotentialError::SigmaOutOfRange { .. } => OUT_OF_DOMAIN,
        PotentialError::Root(_) => SOLVER_FAILURE,
        _ => INVALID_POTENTIAL,
    }
}

pub fn code_for_phase(e: &PhaseError) -> i32 {
    match e {
        PhaseError::EpsOutOfRange { .. } | PhaseError::Domain { .. } => OUT_OF_DOMAIN,
        PhaseError::Potential(p) => code_for_potential(p),
        _ => SOLVER_FAILURE,
    }
}

pub fn code_for_stationary(e: &StationaryError) -> i32 {
    match e {
        StationaryError::Domain(_) => OUT_OF_DOMAIN,
        StationaryError::Phase(p) => code_for_phase(p),
        StationaryError::Potential(p) => code_for_potential(p),
        _ => SOLVER_FAILURE,
    }
}

pub fn code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<StationaryError>() {
            return code_for_stationary(e);
        }
        if let Some(e) = cause.downcast_ref::<PhaseError>() {
            return code_for_phase(e);
        }
        if let Some(e) = cause.downcast_ref::<PotentialError>() {
            return code_for_potential(e);
        }
        if let Some(e) = cause.downcast_ref::<SimError>() {
            return match e {
                SimError::Stiffness { .. } => STIFFNESS,
                SimError::InvalidConfig(_) => OUT_OF_DOMAIN,
            };
        }
        if cause.downcast_ref::<OutOfDomain>().is_some() {
            return OUT_OF_DOMAIN;
        }
    }
    OTHER
}
