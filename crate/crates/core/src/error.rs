use thiserror::Error;

/// Errors produced by the tensor, index-algebra and approximation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("index {index:?} out of bounds for shape {dims:?}")]
    IndexOutOfBounds { index: Vec<usize>, dims: Vec<usize> },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid split {split} for an order-{order} tensor (need 1 <= s <= d-1)")]
    InvalidSplit { split: usize, order: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("tensor with {entries} entries exceeds the dense memory budget")]
    TooLarge { entries: u128 },

    #[error("core {core} has a rank-deficient unfolding; the factorization is not minimal")]
    RankDeficient { core: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid index operation: {0}")]
    InvalidIndex(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
