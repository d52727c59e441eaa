use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),

    #[error("too large for brute force: {0}")]
    TooLarge(String),

    #[error("generator matrix is rank deficient: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}
