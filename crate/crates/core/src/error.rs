use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlashError {
    /// An input lies outside the domain on which a model law is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model was pushed past the range where its outputs stay meaningful.
    #[error("model range exceeded: {0}")]
    ModelRange(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// More than the allowed mass fell outside the voltage grid.
    #[error("grid coverage: {0}")]
    GridCoverage(String),

    #[error("search range does not bracket the target: {0}")]
    Bracketing(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("lattice has not been programmed since the last wear-only cycle")]
    NotProgrammed,

    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl FlashError {
    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            FlashError::Domain(_) => "domain",
            FlashError::ModelRange(_) => "model_range",
            FlashError::Argument(_) => "argument",
            FlashError::GridCoverage(_) => "grid_coverage",
            FlashError::Bracketing(_) => "bracketing",
            FlashError::Config(_) => "config",
            FlashError::NotProgrammed => "not_programmed",
            FlashError::Io { .. } => "io",
            FlashError::Csv(_) => "csv",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FlashError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, FlashError>;
