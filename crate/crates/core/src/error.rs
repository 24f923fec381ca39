use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a precondition (non-finite coordinate, bad config, m > N for FPS, ...).
    #[error("rejected input: {0}")]
    InvalidInput(String),

    /// Malformed on-disk data.
    #[error("format error in {}: {message} (byte offset {offset})", path.display())]
    Format {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error: every library error is a data/format error (2).
    /// Usage errors (1) and check failures (3) originate in the CLI layer.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
