//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A barrier argument left the interior of its domain.
    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("matrix {index} failed the PSD check (lambda_min estimate {lambda_min:.3e})")]
    NotPsd { index: usize, lambda_min: f64 },

    #[error("matrix {index} is not symmetric")]
    NotSymmetric { index: usize },

    #[error("matrix {index} has nonpositive trace")]
    NonpositiveTrace { index: usize },

    #[error("dimension {n} exceeds the dense cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("implicit QL iteration failed to converge")]
    EigNonconvergence,

    /// Trace rows lack the per-iteration optimality gap, which requires a
    /// diagnostic run against a known optimal value.
    #[error("per-iteration optimality gap missing from trace")]
    MissingOptGap,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
