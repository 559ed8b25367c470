use std::path::PathBuf;

use crate::corpus::LevelA;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: line {line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("empty timeline: {0}")]
    EmptyTimeline(String),

    #[error("invalid timeline: {0}")]
    InvalidTimeline(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class {0} has no training samples; cannot oversample an unobserved class")]
    EmptyClass(LevelA),

    #[error("group {group} holds all samples of class {class}; pin it so it stays in every training set")]
    MustPin { group: String, class: LevelA },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("non-finite loss at epoch {epoch}, {stage}")]
    NonFiniteLoss { epoch: usize, stage: String },

    #[error("fold {group}: {source}")]
    Fold {
        group: String,
        #[source]
        source: Box<Error>,
    },

    #[error("sweep cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (configuration or data) rather
    /// than failures during a run.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidConfig(_) | Error::MustPin { .. } => true,
            Error::Fold { source, .. } | Error::Cell { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
