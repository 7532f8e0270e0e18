use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error)]
pub enum CovError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    Asymmetric { row: usize, col: usize, gap: f64 },

    #[error("symmetric eigensolver did not converge for eigenvalue {index}")]
    EigenFailure { index: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("reference solver did not converge within {iterations} iterations")]
    OracleFailure { iterations: usize },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<CovError>,
    },
}

pub type Result<T> = std::result::Result<T, CovError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CovError {
    CovError::InvalidInput(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(CovError::DimensionMismatch { expected, found })
    }
}
