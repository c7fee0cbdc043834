use thiserror::Error;

use crate::grid::ComplexState;

pub type Result<T> = std::result::Result<T, NlsError>;

#[derive(Debug, Error)]
pub enum NlsError {
    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear solve failed at row {row}: pivot magnitude {pivot:e} below threshold {threshold:e}")]
    SingularSystem {
        row: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("negative argument to G: ({0}, {1})")]
    NegativeArgument(f64, f64),

    #[error("alpha coefficients must sum to zero (sum = {0:e})")]
    AlphaNotConsistent(f64),

    #[error("history holds {have} states, {need} required")]
    InsufficientHistory { have: usize, need: usize },

    #[error("fixed-point solver failed: {0}")]
    FixedPoint(Box<FixedPointFailure>),

    #[error("exact-sample startup requested but no sampler was provided")]
    MissingSampler,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("root not found: {0}")]
    RootNotFound(String),

    #[error("dispersion error undefined for omega = 0")]
    ZeroOmega,

    #[error("run stopped early at t = {t} with status {status}")]
    RunStopped { t: f64, status: String },

    #[error("diagnostics are empty")]
    EmptyDiagnostics,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    MaxIterations,
    NonFinite,
    LinearSolve,
}

/// Fixed-point iteration that did not reach the tolerance. Carries the last
/// iterate `w` so callers can inspect the state near a singularity.
#[derive(Debug, Clone)]
pub struct FixedPointFailure {
    pub reason: FailureReason,
    pub iterations: usize,
    pub last_iterate: ComplexState,
    pub last_increment: f64,
}

impl std::fmt::Display for FixedPointFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.reason {
            FailureReason::MaxIterations => "iteration limit reached",
            FailureReason::NonFinite => "non-finite iterate",
            FailureReason::LinearSolve => "shifted linear solve failed",
        };
        write!(
            f,
            "{what} after {} iterations (last increment {:e})",
            self.iterations, self.last_increment
        )
    }
}

impl From<FixedPointFailure> for NlsError {
    fn from(f: FixedPointFailure) -> Self {
        NlsError::FixedPoint(Box::new(f))
    }
}
