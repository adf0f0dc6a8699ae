//! Crate-level error type with the stable exit-code contract:
//! 0 success, 2 input/validation error, 3 generation failure.

use std::path::PathBuf;

use rrseg_core::gen::GenError;
use rrseg_core::lexicon::LexiconError;
use rrseg_core::mask::MaskError;
use rrseg_core::metrics::MetricsError;
use rrseg_core::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid dataset: {0}")]
    Validation(String),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Generation(#[from] GenError),
}

impl Error {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Generation(GenError::GenerationExhausted { .. }) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
