//! Stationary problems: the auxiliary concentration profile and the
//! nonlinear stationary system.

pub mod malpha;
pub mod picard;

pub use malpha::{solve_malpha, verify_malpha_bounds, AuxiliaryMalpha, MalphaReport};
pub use picard::{solve_stationary, stationary_residual, PicardStep, StationarySolution};
