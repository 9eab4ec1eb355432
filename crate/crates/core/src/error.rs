use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis of dimension {dim} exceeds the capacity limit {limit} ({slots} slots, cap {cap})")]
    Capacity {
        dim: u128,
        limit: usize,
        slots: usize,
        cap: usize,
    },
    #[error("operators live on different bases: {left} vs {right}")]
    BasisMismatch { left: String, right: String },
    #[error("matrix shape {rows}x{cols} does not match basis dimension {dim}")]
    Shape { rows: usize, cols: usize, dim: usize },
    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPsd { eigenvalue: f64 },
    #[error("operator is not Hermitian: asymmetry {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },
    #[error("relation degree {degree} exceeds the truncation cap {cap}")]
    TruncationTooSmall { degree: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("precondition failed:\n{0}")]
    Precondition(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(err: ndarray_linalg::error::LinalgError) -> Self {
        Error::Numeric(err.to_string())
    }
}
