use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("vector is not tangent at the base point (inner product {inner})")]
    NotTangent { inner: f64 },

    #[error("basis is not orthonormal: |<Z_{i}, Z_{j}> - δ| = {deviation:e}")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },

    #[error("input vectors are rank deficient (residual {residual:e} at index {index})")]
    RankDeficient { index: usize, residual: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("point outside the closed unit ball (norm {norm})")]
    OutsideBall { norm: f64 },

    #[error("{0} is outside its domain")]
    OutOfDomain(String),

    #[error("contrast '{0}' is not certified: its h' is not strictly monotone")]
    NotCertified(String),

    #[error("contrast violates the {assumption} condition: {detail}")]
    AssumptionViolated { assumption: &'static str, detail: String },

    #[error("oracle does not provide {0}")]
    Unsupported(&'static str),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is singular or not positive definite ({0})")]
    Singular(String),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("samples are not whitened (max covariance deviation {deviation:.4} > {tolerance})")]
    NotWhitened { deviation: f64, tolerance: f64 },

    #[error("too few usable points: need {needed}, have {have}")]
    TooFewPoints { needed: usize, have: usize },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("{0} is too large for brute-force evaluation")]
    TooLarge(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
