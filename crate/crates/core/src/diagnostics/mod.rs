//! Weighted norms, rate fitting and the verification suites.

pub mod fit;
pub mod norm;
pub mod report;
pub mod suites;

pub use fit::{fit_decay, fit_exponential, regularization_fit, DecayReport, RegularizationFit, Series, TimeSeries, Verdict};
pub use norm::{norm, sobolev_norm, NormSpec, NormWeight};
pub use report::Report;
pub use suites::{
    bootstrap_demo, bootstrap_from_trace, bootstrap_norms, entropy_dissipation_monitor, polynomial_phase_check, BootstrapConfig,
    BootstrapReport, EntropyDissipationReport, PhaseReport,
};
