//! Near-vacuum solver for the inhomogeneous four-wave kinetic equation and
//! numerical checks of its explicit bounds. See the guide in `book/` for a
//! walkthrough.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod kaniel_shinbrot;
pub mod phase;
pub mod picard;
pub mod problem;
pub mod resonance;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/phase-space.md")]
    pub mod phase_space {}
    #[doc = include_str!("../../../book/src/resonant-manifold.md")]
    pub mod resonant_manifold {}
    #[doc = include_str!("../../../book/src/constants.md")]
    pub mod constants {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    pub mod solvers {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    pub mod scenarios {}
}
