use alloc::boxed::Box;
use alloc::string::String;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vectors must have at least one coordinate")]
    EmptyVector,

    #[error("coordinate {index} is {value}; expected a finite nonnegative value")]
    NotNonnegative { index: usize, value: f64 },

    #[error("coordinate {index} is {value}; expected a strictly positive value")]
    NotStrictlyPositive { index: usize, value: f64 },

    #[error("invalid box: {0}")]
    InvalidBox(&'static str),

    #[error("mapping produced a non-finite value at coordinate {index}")]
    NonFinite { index: usize },

    #[error("mapping claims positivity but coordinate {index} of its output is {value}")]
    PositivityViolated { index: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("certificate refused: {0}")]
    CertificateRefused(String),

    #[error("no valid epsilon: the start point is neither strongly below nor strongly above the fixed point")]
    NoValidEpsilon,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("no fixed point: spectral radius bracket [{lo}, {hi}] is not below 1")]
    Infeasible { lo: f64, hi: f64 },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("user {user}, station {station}: {source}")]
    Pencil {
        user: usize,
        station: usize,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
