use thiserror::Error;

/// Errors produced anywhere in the link simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported constellation order {0} (supported: 2, 4, 16, 64)")]
    UnsupportedOrder(u32),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("group index {group} out of range (0..{groups})")]
    GroupOutOfRange { group: usize, groups: usize },

    #[error("codebook of 2^{eta} entries exceeds the enumeration cap of {cap}")]
    CapExceeded { eta: usize, cap: u64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("channel submatrix for group {group} is numerically rank-deficient")]
    RankDeficient { group: usize },

    #[error("detector {detector} cannot be used with scheme {scheme}")]
    SchemeMismatch { detector: String, scheme: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
