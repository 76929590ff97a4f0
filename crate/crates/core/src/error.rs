use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("support of the diagonal state ({support}) exceeds the cutoff {cutoff}")]
    Truncation { support: usize, cutoff: usize },

    #[error("invalid phase matrix: {0}")]
    InvalidMatrix(String),

    #[error("not state-generated at this depth: {0}")]
    NotStateGenerated(String),

    #[error("criterion inapplicable: {0}")]
    Inapplicable(String),

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
