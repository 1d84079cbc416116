//! Error types shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input line; `line` is 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Keycode present in the event log but absent from the keymap (strict mode).
    #[error("line {line}: unmapped keycode {code}")]
    UnmappedKeycode { code: u32, line: usize },

    /// Symbol that cannot be serialized back to a keycode.
    #[error("no keycode for symbol {0:?}")]
    UnmappedSymbol(String),

    #[error("empty series")]
    EmptySeries,

    #[error("insufficient intervals: need at least {needed}, got {got}")]
    InsufficientIntervals { needed: usize, got: usize },

    #[error("empty baseline: no bigram instances")]
    EmptyBaseline,

    #[error("no overlap between window and baseline bigrams")]
    NoOverlap,

    #[error("empty bigram set")]
    EmptyBigramSet,

    #[error("no valid windows")]
    NoValidWindows,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid session spec: field `{field}`: {reason}")]
    SessionSpec { field: String, reason: String },

    /// Wraps a module error with the file it came from.
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code for this error: 1 for usage/config problems,
    /// 2 for data and I/O problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::SessionSpec { .. } => 1,
            Error::InFile { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
