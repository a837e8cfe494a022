//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration supplied by the caller (invalid pattern, bad URL
    /// template, and similar).
    #[error("configuration error: {0}")]
    Config(String),

    /// A numeric or structural parameter is out of range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A requested report does not exist at the configured source.
    #[error("report {0} not found")]
    NotFound(String),

    /// A network-level failure; safe to retry.
    #[error("transport error fetching {id}: {source}")]
    Transport {
        id: String,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    /// Ingestion produced no documents.
    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    /// Vocabulary filtering removed every term.
    #[error("empty vocabulary after filtering")]
    EmptyVocabulary,

    /// An operation received an empty matrix or document set.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// An external embedding file does not cover the corpus.
    #[error("embedding alignment error: no vector for document {0}")]
    Alignment(String),

    /// c-TF-IDF was asked to weight zero classes.
    #[error("no classes available for class-based term weighting")]
    EmptyClasses,

    /// Topic-level geometry needs at least two topics.
    #[error("need at least 2 non-outlier topics, got {0}")]
    InsufficientTopics(usize),

    /// Input data failed a structural validation check.
    #[error("validation error: {0}")]
    Validation(String),

    /// Filesystem failure with the offending path attached.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// JSON (de)serialization failure with the offending path attached.
    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Transport failures are transient; everything else is not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Transport { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
