use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {n} sites")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance file {context}: {message}")]
    Parse { context: String, message: String },

    #[error("{what} needs n <= {cap}, instance has n = {n}")]
    TooLarge { what: &'static str, n: usize, cap: usize },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("no parameters for depth Q = {q}; available depths: {available:?}")]
    MissingDepth { q: usize, available: Vec<usize> },

    #[error("ground state unavailable: {0}")]
    MissingGround(String),

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("inconsistent delta table at site {site}: stored {stored}, expected {expected}")]
    InconsistentTable { site: usize, stored: f64, expected: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        message: message.into(),
    }
}
