pub mod cahn_hilliard;
pub mod numerics;
pub mod phase_plane;
pub mod potential;
pub mod stationary;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/potential.md")]
    pub mod potential {}
    #[doc = include_str!("../../../book/src/phase_plane.md")]
    pub mod phase_plane {}
    #[doc = include_str!("../../../book/src/solving.md")]
    pub mod solving {}
    #[doc = include_str!("../../../book/src/energy.md")]
    pub mod energy {}
    #[doc = include_str!("../../../book/src/gradient_flow.md")]
    pub mod gradient_flow {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
