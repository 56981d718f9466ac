use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input domain error: {0}")]
    InputDomain(String),

    #[error("insufficient sample: need at least {needed} observations, got {got}")]
    InsufficientSample { needed: usize, got: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("data error at row {row}, column {col}: {msg}")]
    Data { row: usize, col: usize, msg: String },

    #[error("{0}")]
    DataFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn insufficient(needed: usize, got: usize) -> Self {
        Error::InsufficientSample { needed, got }
    }
}
