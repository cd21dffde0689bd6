//! Versioned JSON model artifact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ForecastModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("model artifact format version {found} is newer than supported version {supported}")]
    Version { found: u32, supported: u32 },
    #[error("corrupt model artifact: {0}")]
    Corrupt(String),
}

#[derive(Serialize)]
struct Document<'a> {
    format_version: u32,
    model: &'a ForecastModel,
}

#[derive(Deserialize)]
struct Header {
    format_version: u32,
}

#[derive(Deserialize)]
struct OwnedDocument {
    model: ForecastModel,
}

/// Serializes the model with its dimensions, row-major parameter arrays,
/// normalization constants, config and training report.
pub fn save_model(model: &ForecastModel) -> Vec<u8> {
    serde_json::to_vec_pretty(&Document {
        format_version: FORMAT_VERSION,
        model,
    })
    .expect("model serialization is infallible")
}

pub fn load_model(bytes: &[u8]) -> Result<ForecastModel, ArtifactError> {
    let header: Header =
        serde_json::from_slice(bytes).map_err(|e| ArtifactError::Corrupt(e.to_string()))?;
    if header.format_version > FORMAT_VERSION {
        return Err(ArtifactError::Version {
            found: header.format_version,
            supported: FORMAT_VERSION,
        });
    }
    let doc: OwnedDocument =
        serde_json::from_slice(bytes).map_err(|e| ArtifactError::Corrupt(e.to_string()))?;
    let model = doc.model;
    model
        .params
        .check()
        .map_err(|e| ArtifactError::Corrupt(e.to_string()))?;
    if model.params.input_dim != super::INPUT_DIM {
        return Err(ArtifactError::Corrupt(format!(
            "input dimension {} != {}",
            model.params.input_dim,
            super::INPUT_DIM
        )));
    }
    if model.params.hidden_dim != model.config.hidden_dim {
        return Err(ArtifactError::Corrupt(
            "hidden dimension disagrees with config".into(),
        ));
    }
    if model.normalization.scale.iter().any(|s| !(*s > 0.0)) {
        return Err(ArtifactError::Corrupt(
            "non-positive normalization scale".into(),
        ));
    }
    Ok(model)
}
