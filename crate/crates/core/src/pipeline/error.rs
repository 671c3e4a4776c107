use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::inversion::InversionError;
use crate::metrics::MetricsError;
use crate::rtm::RtmError;
use crate::scene_ingest::IngestError;
use crate::spectral::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Configure,
    Rtm,
    Inversion,
    Export,
    Compare,
}

impl Stage {
    /// Process exit code reported for a failure in this stage.
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Ingest => 3,
            Stage::Configure | Stage::Rtm => 4,
            Stage::Inversion => 5,
            Stage::Export | Stage::Compare => 6,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Stage::Ingest => 1,
            Stage::Configure => 2,
            Stage::Rtm => 3,
            Stage::Inversion => 4,
            Stage::Export | Stage::Compare => 5,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Ingest => "ingest",
            Stage::Configure => "configure",
            Stage::Rtm => "rtm",
            Stage::Inversion => "inversion",
            Stage::Export => "export",
            Stage::Compare => "compare",
        };
        write!(f, "stage {} ({name})", self.number())
    }
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Rtm(#[from] RtmError),
    #[error(transparent)]
    Inversion(#[from] InversionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
}

impl StageError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        StageError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: StageError,
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        self.stage.exit_code()
    }
}

pub(crate) trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<StageError>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError {
            stage,
            source: e.into(),
        })
    }
}
