use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero vector at row {0}")]
    ZeroVector(usize),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative probability mass {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("missing canonical answer for question {0}")]
    MissingCanonicalAnswer(String),

    #[error("AUROC undefined: {0}")]
    UndefinedAuroc(String),

    #[error("question {id} has {available} generations, {requested} requested")]
    InsufficientGenerations {
        id: String,
        available: usize,
        requested: usize,
    },
}
