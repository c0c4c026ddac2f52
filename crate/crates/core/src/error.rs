use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller broke a precondition (bad exponent, wrong dimension, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid body: {reason} (failing probes: {failures:?})")]
    InvalidBody {
        reason: String,
        failures: Vec<String>,
    },

    #[error("degenerate hull: input spans an affine subspace of dimension {rank} < {dim}")]
    DegenerateHull { rank: usize, dim: usize },

    #[error("hull construction produced inconsistent topology: {0}")]
    InconsistentHull(String),

    #[error("rejection envelope violated: f/kappa = {ratio} exceeds envelope {envelope} at u = {direction:?}")]
    EnvelopeViolation {
        ratio: f64,
        envelope: f64,
        direction: Vec<f64>,
    },

    #[error("non-finite integrand value {value} at u = {direction:?}")]
    NonFiniteWeight { value: f64, direction: Vec<f64> },

    #[error("standard error {std_error} above cap {cap} after {samples} samples (partial estimate {value})")]
    StderrCap {
        value: f64,
        std_error: f64,
        cap: f64,
        samples: usize,
    },

    #[error("shrink factor c = {c} outside (0, 1) at N = {n_points}")]
    ShrinkFactor { c: f64, n_points: usize },

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Numerical failures are distinguished from configuration errors by the
    /// command line front-end (exit code 2 versus 1).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateHull { .. }
                | Error::InconsistentHull(_)
                | Error::EnvelopeViolation { .. }
                | Error::NonFiniteWeight { .. }
                | Error::StderrCap { .. }
                | Error::ShrinkFactor { .. }
                | Error::NoConvergence(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
