//! Spectral Galerkin simulation of a generalized bioconvection model:
//! incompressible flow with concentration-dependent viscosity, coupled to an
//! upward-swimming microorganism concentration, in a 2D x-periodic channel.
//!
//! The crate is organised bottom-up:
//! - [`domain_grid`]: Fourier x Lobatto grid, quadrature, norms.
//! - [`operators`]: Leray projection, Stokes and concentration eigenbases,
//!   functional-inequality constants.
//! - [`stationary`]: the auxiliary concentration `m_alpha` and the nonlinear
//!   stationary system.
//! - [`evolution`]: Galerkin ODE systems and IMEX time stepping.
//! - [`estimates`]: Gronwall-type envelopes, the local window, the small-data
//!   cubic and trajectory monitors.
//! - [`experiments`]: canned experiments, configuration and output files.

pub mod domain_grid;
pub mod estimates;
pub mod evolution;
pub mod experiments;
pub mod io;
pub mod operators;
pub mod stationary;

pub use domain_grid::{Domain, DomainSpec, ScalarField, TensorField, VectorField};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient resolution: {0}")]
    Capacity(String),
    #[error("linear solve failed: {0}")]
    Singular(String),
    #[error("smallness condition violated: {0}")]
    Smallness(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error("missing input: {0}")]
    Missing(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("toml: {0}")]
    Toml(String),
}

pub type Result<T> = std::result::Result<T, Error>;
