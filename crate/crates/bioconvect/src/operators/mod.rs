//! Leray projection, Stokes and concentration operators, their eigenbases and
//! the functional-inequality constants of the channel.

pub mod basis;
pub mod constants;
pub mod projection;
mod ritz;

pub use basis::{
    build_concentration_basis, build_spectral_basis, build_stokes_basis, stokes_bc_residual, ConcentrationBasis,
    Parity, SpectralBasis, StokesBasis,
};
pub use constants::{
    check_smallness_u, constants_report, estimate_korn, estimate_poincare, estimate_trace_constant, ConstantsReport,
    Labeled, PoincareClass, Provenance, Verdict,
};
pub use projection::{helmholtz_split_laplacian, leray_project, HelmholtzSplit};
