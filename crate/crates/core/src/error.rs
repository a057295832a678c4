use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural precondition of the caller was not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },

    /// Log-density is +inf at a simplex boundary point (some alpha < 1).
    #[error("density unbounded at boundary coordinate {0}")]
    UnboundedDensity(usize),

    /// Objective is -inf because a weight sits on the simplex boundary.
    #[error("weight {0} is on the simplex boundary")]
    Boundary(usize),

    #[error("sampler failed: {0}")]
    Sampler(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {x}")))
    }
}
