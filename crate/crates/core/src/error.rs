use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FbmError {
    #[error("Hurst parameter must lie in (0, 1], got {0}")]
    InvalidHurst(f64),

    #[error("grid size must be at least 1")]
    EmptyGrid,

    #[error("grid size {n} exceeds the Cholesky sampler limit {limit}")]
    GridTooLarge { n: usize, limit: usize },

    #[error("matrix is not positive semidefinite: pivot {pivot} at row {row}")]
    NotPositiveSemidefinite { row: usize, pivot: f64 },

    #[error("covariance factorization failed for H = {h}, n = {n}: pivot {pivot} at row {row}")]
    CovarianceFactorization { h: f64, n: usize, row: usize, pivot: f64 },

    #[error("circulant embedding has a negative eigenvalue {min} (largest {max})")]
    NegativeEigenvalue { min: f64, max: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T, E = FbmError> = std::result::Result<T, E>;

pub(crate) fn precondition(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(FbmError::Precondition(msg()))
    }
}
