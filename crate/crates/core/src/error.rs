use thiserror::Error;

use crate::grid::KSpaceGrid;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty pattern")]
    EmptyPattern,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected}, found {found}")]
    GridMismatch {
        expected: KSpaceGrid,
        found: KSpaceGrid,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("all-zero data cannot be normalized")]
    ZeroData,

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("locked point {0} is not a member of the pattern")]
    LockedNotMember(usize),

    #[error("cannot remove locked point {0}")]
    RemoveLocked(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("locked region too large: {required} removable points needed, {available} available")]
    LockedTooLarge { required: usize, available: usize },

    #[error("reconstruction diverged at iteration {iteration} (cost trace: {trace:?})")]
    Diverged { iteration: usize, trace: Vec<f64> },

    #[error("item {item}: {source}")]
    Item {
        item: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unrecognized format: {0}")]
    UnrecognizedFormat(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },

    #[error("malformed file: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_item(self, item: usize) -> Self {
        Error::Item {
            item,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerical kernels, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Diverged { .. } | Error::NonFinite(_) => true,
            Error::Item { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
