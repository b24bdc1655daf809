use thiserror::Error;

use crate::model::CellType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table has no cells")]
    EmptyTable,

    #[error("cell text {0:?} is empty or not sanitized")]
    InvalidCell(String),

    #[error("row {row}: {reason}")]
    Parse { row: usize, reason: String },

    #[error("title must not be empty")]
    EmptyTitle,

    #[error("a prompt needs a title or an image")]
    MissingPromptInput,

    #[error("caption must not be empty")]
    EmptyCaption,

    #[error("image dimensions must be positive, got {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },

    #[error("unsupported size cap {0}; expected 256, 384 or 480")]
    InvalidCap(u32),

    #[error("duplicate record id {0:?}")]
    DuplicateId(String),

    #[error("generated and reference lists differ in length ({generated} vs {reference})")]
    LengthMismatch { generated: usize, reference: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("cell type mismatch: expected {expected:?}, found {found:?}")]
    TypeMismatch { expected: CellType, found: CellType },

    #[error("ROUGE-N supports n in {{1, 2}}, got {0}")]
    UnsupportedNgram(usize),

    #[error("bootstrap needs at least {min} paired documents, got {got}")]
    TooFewDocuments { min: usize, got: usize },

    #[error("number of resamples must be positive")]
    ZeroResamples,

    #[error("dataset contains no pair cells")]
    NoPairCells,

    #[error("invalid record {id:?}: {reason}")]
    InvalidRecord { id: String, reason: String },

    #[error("document {index}: {source}")]
    Document {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
