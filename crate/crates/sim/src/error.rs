use std::path::PathBuf;

use crate::runner::FidelityRecord;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] spatial_qudit::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unsupported config schema_version {found} (this build reads {expected})")]
    Schema { found: u32, expected: u32 },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("no records to emit")]
    EmptyResults,
}

impl SimError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;

/// A sweep that stopped early. `completed` holds the records finished
/// before the first failing state, in emission order.
#[derive(Debug, thiserror::Error)]
#[error("run stopped after {} records: {source}", completed.len())]
pub struct RunFailure {
    pub completed: Vec<FidelityRecord>,
    #[source]
    pub source: SimError,
}

impl From<SimError> for RunFailure {
    fn from(source: SimError) -> Self {
        RunFailure {
            completed: Vec::new(),
            source,
        }
    }
}
