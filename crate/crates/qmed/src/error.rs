//! Error type shared by every module of the crate.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix dimensions do not line up for the requested operation.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A matrix expected to be Hermitian is not, beyond tolerance.
    #[error("matrix is not Hermitian: defect {defect:e} exceeds {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },

    /// A matrix expected to be PSD has a negative eigenvalue beyond tolerance.
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e} below -{tol:e}")]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    /// A matrix expected to be unitary is not, beyond tolerance.
    #[error("matrix {index} is not unitary: defect {defect:e} exceeds {tol:e}")]
    NotUnitary {
        index: usize,
        defect: f64,
        tol: f64,
    },

    /// The eigensolver failed to converge within its sweep budget.
    #[error("eigendecomposition did not converge: dim {dim}, max-norm {norm:e}, off-diagonal {off:e} after {sweeps} sweeps")]
    EigNonConvergence {
        dim: usize,
        norm: f64,
        off: f64,
        sweeps: usize,
    },

    /// A stated precondition of an operation is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A document failed validation; `field` is the path of the offending entry.
    #[error("invalid document at `{field}`: {message}")]
    Invalid { field: String, message: String },

    /// A document could not be parsed at all.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
