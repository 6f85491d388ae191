use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller violated an operation's precondition (e.g. a non-unit sounding vector).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The chosen selector strategy cannot be used with this codebook.
    #[error("strategy error: {0}")]
    Strategy(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed codebook file: {0}")]
    Format(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
