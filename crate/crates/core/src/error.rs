use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty vocabulary: {0}")]
    EmptyVocabulary(String),

    #[error("vocabulary mismatch between model ({model} terms) and matrix ({matrix} terms)")]
    VocabularyMismatch { model: usize, matrix: usize },

    #[error("document {0} has no row in the model")]
    UnknownDocument(String),

    #[error("cannot compute {0} on zero tokens")]
    NoTokens(&'static str),

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("no null moments for team size {0}")]
    MissingTeamSize(usize),

    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
