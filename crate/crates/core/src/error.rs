//! Error type shared by every stage of the toolkit.

use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt data: {0}")]
    CorruptData(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Snow coverage or base width below the drivable-road gates.
    #[error("no road detected: {0}")]
    NoRoadDetected(String),

    /// The bottom band of the mask cannot support a triangle base.
    #[error("degenerate base: {0}")]
    DegenerateBase(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}
