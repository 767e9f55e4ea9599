use thiserror::Error;

/// Errors raised by the spectral diffusion toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("band limit must be at least 1 (got {0})")]
    InvalidBandLimit(usize),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("conjugate-symmetry constraint violated: residual {residual:e} exceeds {tolerance:e}")]
    ConstraintViolation { residual: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("score domain mismatch: expected {expected}, got {got}")]
    ScoreDomain {
        expected: &'static str,
        got: &'static str,
    },

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
