use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimensionality {0} (expected 1 or 2)")]
    Dimensionality(u8),

    #[error("coordinate {coordinate} is outside the hierarchy (depth {depth})")]
    CoordinateOutOfRange { coordinate: String, depth: u8 },

    #[error("cannot generalize from {from} down to {to}")]
    NotAnAncestor { from: String, to: String },

    #[error("invalid key {input:?}: {reason}")]
    KeyParse { input: String, reason: String },

    #[error("memory budget of {buckets} buckets cannot cover {nodes} arrays")]
    BudgetTooSmall { buckets: usize, nodes: usize },

    #[error("expected {expected} widths, got {actual}")]
    WidthCount { expected: usize, actual: usize },

    #[error("array {index} has zero width")]
    ZeroWidth { index: usize },

    #[error("hardware-faithful updates require the 1D-byte hierarchy")]
    HardwareModeUnsupported,

    #[error("detect already ran in this epoch; reset the sketch first")]
    AlreadyDetected,

    #[error("report and ground truth use different hierarchies")]
    SpecMismatch,

    #[error("shadow tracker was built for a different sketch configuration")]
    ConfigMismatch,

    #[error("invalid trace parameters: {0}")]
    TraceParams(String),

    #[error("{path}: line {line}: {reason}")]
    CsvParse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("{path}: offset {offset}: {reason}")]
    PackedParse {
        path: PathBuf,
        offset: u64,
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
