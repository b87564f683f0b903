//! Fixed-point iteration, spectral radius, certificates and diagnostics.

pub mod certificate;
pub mod diagnostics;
pub mod iterate;
pub mod spectral;

pub use certificate::{box_invariant, contraction_certificate, contraction_curve, ContractionCertificate};
pub use diagnostics::{
    banach_bound, convergence_diagnostics, error_lower_bound, geometric_envelope, max_valid_eps,
    ConvergenceDiagnostics, DiagnosticOptions, RateClass,
};
pub use iterate::{
    feasibility_probe, fixed_point_iterate, IterateOptions, IterationFailure, IterationTrace, NormTriple,
    StepRecord, StopReason,
};
pub use spectral::{
    feasibility_check, mapping_spectral_radius, matrix_spectral_radius, spectral_radius, Feasibility,
    SpectralOptions, SpectralRadiusEstimate,
};
