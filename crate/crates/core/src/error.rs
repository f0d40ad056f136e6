use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("csv parse error at row {row}: {msg}")]
    MalformedRow { row: usize, msg: String },

    #[error("series error: {0}")]
    Series(String),

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("rational expectations solver did not converge: {0}")]
    Indeterminacy(String),

    #[error("unstable rational solution: {0}")]
    Instability(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    #[error("window out of range: {0}")]
    WindowOutOfRange(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("fetch error: {0}")]
    Fetch(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
