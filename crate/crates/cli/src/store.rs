//! File-backed persistence: one JSON document per model and per forecast.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use procload_core::forecast::{load_model, save_model, ForecastModel};
use procload_core::pipeline::WorkloadForecast;
use sha2::{Digest, Sha256};

use crate::AppError;

#[derive(Debug, Clone)]
pub struct FileStore {
    model_dir: PathBuf,
    forecast_dir: PathBuf,
}

/// File stem for an article type; anything outside a plain alphabet is
/// hex-encoded so labels can never escape the directory.
fn stem(article_type: &str) -> String {
    let plain = !article_type.is_empty()
        && !article_type.starts_with('.')
        && article_type
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if plain {
        article_type.to_string()
    } else {
        format!("x-{}", hex::encode(article_type))
    }
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), AppError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(dir.join(name))
        .map_err(|e| AppError::Io(e.error))?;
    Ok(())
}

impl FileStore {
    pub fn new(model_dir: impl Into<PathBuf>, forecast_dir: impl Into<PathBuf>) -> Self {
        FileStore {
            model_dir: model_dir.into(),
            forecast_dir: forecast_dir.into(),
        }
    }

    pub fn model_path(&self, article_type: &str) -> PathBuf {
        self.model_dir.join(format!("{}.json", stem(article_type)))
    }

    pub fn save_model(&self, model: &ForecastModel) -> Result<PathBuf, AppError> {
        fs::create_dir_all(&self.model_dir)?;
        write_atomic(
            &self.model_dir,
            &format!("{}.json", stem(&model.article_type)),
            &save_model(model),
        )?;
        Ok(self.model_path(&model.article_type))
    }

    /// `Ok(None)` when no model has been saved for the type.
    pub fn load_model(&self, article_type: &str) -> Result<Option<ForecastModel>, AppError> {
        match fs::read(self.model_path(article_type)) {
            Ok(bytes) => Ok(Some(load_model(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Stores the forecast under the hash of its JSON encoding and returns
    /// that id. Saving an equal forecast again yields the same id.
    pub fn save_forecast(&self, forecast: &WorkloadForecast) -> Result<String, AppError> {
        let bytes = serde_json::to_vec(forecast)?;
        let id = hex::encode(&Sha256::digest(&bytes)[..12]);
        fs::create_dir_all(&self.forecast_dir)?;
        write_atomic(&self.forecast_dir, &format!("{id}.json"), &bytes)?;
        Ok(id)
    }

    pub fn load_forecast(&self, id: &str) -> Result<WorkloadForecast, AppError> {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(AppError::NotFound(format!("forecast `{id}`")));
        }
        match fs::read(self.forecast_dir.join(format!("{id}.json"))) {
            Ok(bytes) => Ok(serde_json::from_slice(&bytes)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(AppError::NotFound(format!("forecast `{id}`")))
            }
            Err(e) => Err(e.into()),
        }
    }
}
