//! Root finding, polynomial helpers and singular quadrature.

pub mod poly;
pub mod quad;
pub mod roots;

pub use quad::{
    integrate_singular, integrate_singular_n, Node, QuadResult, QuadResultN, SingularIntegrand,
    DEFAULT_MAX_LEVELS, DEFAULT_REL_TOL,
};
pub use roots::{find_root, RootError};
