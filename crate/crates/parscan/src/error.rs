use thiserror::Error;

/// Errors produced by graph loading, configuration validation, index
/// (de)serialization, and the brute-force checker.
#[derive(Debug, Error)]
pub enum ScanError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed edge-list input. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structurally invalid graph input (e.g. duplicate edge with two
    /// different weights).
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// Invalid parameter or flag combination.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index file: bad magic bytes")]
    IndexMagic,

    #[error("index file: unsupported version {found}")]
    IndexVersion { found: u32 },

    #[error("index file: truncated stream")]
    IndexTruncated,

    #[error("index file: checksum mismatch")]
    IndexChecksum,

    #[error("index file: malformed payload: {0}")]
    IndexMalformed(String),

    /// Input exceeds a size guard (the brute-force checker refuses large graphs).
    #[error("size guard: {0}")]
    SizeGuard(String),
}

impl ScanError {
    /// Stable machine-readable category, used by the CLI for error reporting.
    pub fn category(&self) -> &'static str {
        match self {
            ScanError::Io(_) => "io",
            ScanError::Parse { .. } => "parse",
            ScanError::InvalidGraph(_) => "graph",
            ScanError::Config(_) => "config",
            ScanError::IndexMagic
            | ScanError::IndexVersion { .. }
            | ScanError::IndexTruncated
            | ScanError::IndexChecksum
            | ScanError::IndexMalformed(_) => "format",
            ScanError::SizeGuard(_) => "guard",
        }
    }
}

pub type Result<T> = std::result::Result<T, ScanError>;
