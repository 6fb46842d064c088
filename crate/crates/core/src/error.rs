use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::kernel::Provenance;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("video has no frames")]
    EmptyVideo,

    /// Malformed frame-score, store or report file. `at` names the byte
    /// offset or row/column where parsing stopped.
    #[error("format error in {path}: {message} (at {at})")]
    Format {
        path: String,
        at: String,
        message: String,
    },

    #[error("manifest validation failed for event `{event}`: {message}")]
    Validation { event: String, message: String },

    #[error("manifest syntax error at line {line}: {message}")]
    ManifestSyntax { line: usize, message: String },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("build error for video `{video_id}`: {message}")]
    Build { video_id: String, message: String },

    #[error("scorer protocol error at line {line}: {message}")]
    ScorerProtocol { line: usize, message: String },

    #[error("provenance mismatch: expected {expected}, found {found}")]
    ProvenanceMismatch {
        expected: Provenance,
        found: Provenance,
    },

    #[error("invalid synthetic config: {0}")]
    Config(String),

    #[error("i/o error on {path}", path = path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(
        path: impl Into<String>,
        at: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Format {
            path: path.into(),
            at: at.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the filesystem or a child process pipe
    /// rather than by the data itself.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
