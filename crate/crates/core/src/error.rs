//! Shared error type for the pipeline library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error at {path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("document {doc_id} has no embeddable tokens")]
    Unembeddable { doc_id: String },

    #[error("no users common to communities {0} and {1}")]
    NoCommonUsers(String, String),

    #[error("Krippendorff alpha undefined: {0}")]
    UndefinedAlpha(String),

    #[error("nothing to rank: all documents are noise")]
    NothingToRank,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
