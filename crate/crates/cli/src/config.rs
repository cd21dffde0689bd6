//! Service configuration: TOML file plus `PROCLOAD_*` environment overrides.

use std::fs;
use std::path::{Path, PathBuf};

use procload_core::eventlog::LogSchema;
use procload_core::forecast::TrainConfig;
use procload_core::pipeline::{EvalConfig, PipelineConfig};
use serde::{Deserialize, Serialize};

use crate::AppError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub data_dir: PathBuf,
    pub model_dir: PathBuf,
    /// Event log read by commands that are not given `--log`.
    pub log_path: Option<PathBuf>,
    pub bind: String,
    pub seed: u64,
    pub schema: LogSchema,
    pub train: TrainConfig,
    pub pipeline: PipelineConfig,
    /// Re-injected weeks scored by `evaluate`.
    pub eval_horizon_weeks: usize,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            data_dir: PathBuf::from("data"),
            model_dir: PathBuf::from("data/models"),
            log_path: None,
            bind: "127.0.0.1:8080".into(),
            seed: 0,
            schema: LogSchema::default(),
            train: TrainConfig::default(),
            pipeline: PipelineConfig::default(),
            eval_horizon_weeks: 41,
        }
    }
}

impl AppConfig {
    /// Reads `path` if given, then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, AppError> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| AppError::Config(format!("{}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| AppError::Config(format!("{}: {e}", p.display())))?
            }
            None => AppConfig::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), AppError> {
        if let Some(v) = get("PROCLOAD_DATA_DIR") {
            self.data_dir = v.into();
        }
        if let Some(v) = get("PROCLOAD_MODEL_DIR") {
            self.model_dir = v.into();
        }
        if let Some(v) = get("PROCLOAD_LOG") {
            self.log_path = Some(v.into());
        }
        if let Some(v) = get("PROCLOAD_BIND") {
            self.bind = v;
        }
        if let Some(v) = get("PROCLOAD_SEED") {
            self.seed = v
                .parse()
                .map_err(|_| AppError::Config(format!("PROCLOAD_SEED: not an integer: {v}")))?;
        }
        Ok(())
    }

    pub fn forecast_dir(&self) -> PathBuf {
        self.data_dir.join("forecasts")
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            train: self.train.clone(),
            prep: self.pipeline.prep.clone(),
            horizon_weeks: self.eval_horizon_weeks,
            article_types: Vec::new(),
        }
    }

    /// Creates the data, model and forecast directories and checks that
    /// they accept files.
    pub fn ensure_dirs(&self) -> Result<(), AppError> {
        for dir in [&self.data_dir, &self.model_dir, &self.forecast_dir()] {
            fs::create_dir_all(dir)
                .map_err(|e| AppError::Config(format!("{}: {e}", dir.display())))?;
            tempfile::NamedTempFile::new_in(dir)
                .map_err(|e| AppError::Config(format!("{} is not writable: {e}", dir.display())))?;
        }
        Ok(())
    }
}
