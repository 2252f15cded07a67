use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the toolkit.
///
/// The variants map onto the CLI exit-code contract: validation-style errors
/// (`Shape`, `Parameter`, `Position`, `Config`, `Sampling`, `UndefinedProfile`)
/// are user errors, while `Format` and `Io` concern files on disk.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("position {position:?} outside grid {rows}x{cols}")]
    Position {
        position: (usize, usize),
        rows: usize,
        cols: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("spectrum undefined: {0}")]
    UndefinedProfile(String),
    #[error("format error in {field}: {message}")]
    Format { field: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn format(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by files on disk rather than by arguments.
    pub fn is_io_or_format(&self) -> bool {
        matches!(self, Error::Format { .. } | Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
