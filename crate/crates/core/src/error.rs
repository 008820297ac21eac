use alloc::string::String;

/// Errors raised by the numerical and corpus operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("zero variance")]
    ZeroVariance,
    #[error("degenerate point cloud")]
    Degenerate,
    #[error("component count {k} out of range 1..={max}")]
    ComponentCount { k: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-finite value at row {row}")]
    NonFinite { row: usize },
    #[error("word `{0}` not found")]
    MissingWord(String),
    #[error("token `{found}` at sentence {sentence_id}, index {token_index} is not part of pair {female}/{male}")]
    NotInPair {
        sentence_id: usize,
        token_index: usize,
        found: String,
        female: String,
        male: String,
    },
    #[error("occurrence ({sentence_id}, {token_index}) is out of range")]
    BadOccurrence { sentence_id: usize, token_index: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
