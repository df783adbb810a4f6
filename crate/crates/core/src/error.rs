use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A matrix that must be positive definite failed its Cholesky factorization.
    #[error("matrix is not positive definite{0}")]
    NotPositiveDefinite(String),
    /// A matrix that must be invertible is singular.
    #[error("singular matrix: {0}")]
    Singular(String),
    /// Shapes of the operands do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A matrix or hyperparameter could not be decoded.
    #[error("invalid encoding: {0}")]
    Encoding(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn not_pd(context: &str) -> Self {
        if context.is_empty() {
            Error::NotPositiveDefinite(String::new())
        } else {
            Error::NotPositiveDefinite(format!(" ({context})"))
        }
    }

    /// True for failures that stem from the numerical content of a matrix
    /// rather than from a malformed request.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotPositiveDefinite(_) | Error::Singular(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
