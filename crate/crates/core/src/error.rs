//! Error type shared across the pipeline.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller violated a documented precondition (bad order, mismatched
    /// vector lengths, empty input, ...). The message names the offender.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Eye geometry too degenerate to define a similarity transform.
    #[error("registration failed: {0}")]
    Registration(String),

    /// Manifest or sidecar problems; the message names the file and line.
    #[error("dataset error: {0}")]
    Dataset(String),

    /// A serialized model file is malformed or from an unknown version.
    #[error("model format error: {0}")]
    ModelFormat(String),

    /// A model was trained under a different extraction configuration than
    /// the one now being used for scoring.
    #[error("config fingerprint mismatch: model has {model}, current is {current}")]
    FingerprintMismatch { model: String, current: String },

    /// The failed path in the message; the underlying cause in the chain.
    #[error("i/o error on {}", path.display())]
    Io {
        path: PathBuf,
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

pub type Result<T> = std::result::Result<T, Error>;
