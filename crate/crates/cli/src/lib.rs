//! Configuration, persistence, command line and HTTP API around
//! `procload-core`.

pub mod api;
pub mod commands;
pub mod config;
pub mod store;

use std::path::Path;

use procload_core::eventlog::{parse_log, EventLog, EventLogError, LogSchema};
use procload_core::forecast::{ArtifactError, ForecastError};
use procload_core::pipeline::PipelineError;
use procload_core::replay::ReplayError;
use procload_core::workload::WorkloadError;
use serde::Serialize;
use thiserror::Error;

pub use config::AppConfig;
pub use store::FileStore;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error(transparent)]
    EventLog(#[from] EventLogError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Machine-readable error body for stderr and HTTP responses.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
}

impl AppError {
    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Config(_) => "config",
            AppError::BadRequest(_) => "bad_request",
            AppError::NotFound(_) => "not_found",
            AppError::Conflict(_) => "conflict",
            AppError::EventLog(_) => "event_log",
            AppError::Workload(_) => "workload",
            AppError::Forecast(_) => "forecast",
            AppError::Artifact(_) => "model_artifact",
            AppError::Pipeline(
                PipelineError::MissingModel(_) | PipelineError::UnknownArticleType(_),
            ) => "not_found",
            AppError::Pipeline(PipelineError::InvalidRequest(_)) => "bad_request",
            AppError::Pipeline(_) => "pipeline",
            AppError::Replay(_) => "replay",
            AppError::Io(_) => "io",
            AppError::Json(_) => "json",
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            error: self.kind(),
            message: self.to_string(),
        }
    }
}

pub fn read_log(path: &Path, schema: &LogSchema) -> Result<EventLog, AppError> {
    let file = std::fs::File::open(path)
        .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
    Ok(parse_log(std::io::BufReader::new(file), schema)?)
}
