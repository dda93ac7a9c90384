//! Inequality toolkit: Gronwall comparators, the local window, the energy
//! envelope, the small-data cubic and conditions, and trajectory monitors.

pub mod envelope;
pub mod gronwall;
pub mod monitor;
pub mod polynomial;
pub mod sampled;
pub mod smallness;

pub use envelope::{energy_envelope_monitor, EnvelopeReport, EnvelopeSpec};
pub use gronwall::{gronwall_envelope, lemma10_window, GronwallReport, Lemma10Window};
pub use monitor::{monitor_strong_estimates, predict_window, uniqueness_envelope, StrongMonitorReport, UniquenessReport, WindowPrediction};
pub use polynomial::{polynomial_p_roots, CubicRoots};
pub use sampled::SampledConstants;
pub use smallness::{global_smallness_check, SmallnessReport};
