//! Galerkin time evolution.

pub mod config;
pub mod forms;
pub mod integrate;
pub mod system;
pub mod viscosity;

pub use config::{SimConfig, Variant};
pub use integrate::{integrate, integrate_with, DiagnosticsLedger, DiagnosticsRow, Trajectory};
pub use system::{initial_projection, GalerkinState, GalerkinSystem, StateNorms};
pub use viscosity::ViscosityModel;
