use std::io;
use std::path::{Path, PathBuf};

/// Failures of the file formats and the command line, each mapped to one
/// process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] latentmap_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    /// A malformed or invalid cell. `line` is 1-based and counts the header;
    /// `column` is 1-based.
    #[error("{}: line {line}, column {column}: {reason}", path.display())]
    Cell {
        path: PathBuf,
        line: u64,
        column: usize,
        reason: String,
    },

    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// 1 for invalid input, 2 for I/O failures, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Core(e) if e.is_numerical() => 3,
            Error::Io { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }
}
