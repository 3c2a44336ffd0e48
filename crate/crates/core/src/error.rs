use thiserror::Error;

/// Errors produced anywhere in the design and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition (bad mass, bad shape, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// The operation is not defined for this kind of input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An inconsistent or infeasible configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The integer accumulator of the variable node is too narrow.
    #[error("accumulator overflow: sum range needs {required} bits, configured {configured}")]
    Overflow { required: u32, configured: u32 },

    /// Malformed alist input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Code construction failed.
    #[error("construction error: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
