use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] coauthor_core::Error),

    #[error("missing {path}: run {stage} first")]
    MissingInput { path: PathBuf, stage: &'static str },

    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
