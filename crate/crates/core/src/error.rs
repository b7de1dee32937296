use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A scenario or game configuration is unusable.
    #[error("configuration error: {0}")]
    Config(String),
    /// A strategy table file could not be read back.
    #[error("strategy table error: {0}")]
    Table(#[from] TableError),
    /// A table does not match the configuration it is evaluated against.
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("file is empty")]
    Empty,
    #[error("file is truncated: {0}")]
    Truncated(String),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checksum mismatch: stored {stored}, computed {computed}")]
    Checksum { stored: String, computed: String },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
