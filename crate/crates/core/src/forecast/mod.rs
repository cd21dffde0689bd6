//! GRU-based one-week-ahead demand regressor with multi-step re-injection.

mod artifact;
mod features;
pub mod gru;
mod model;
mod train;

use thiserror::Error;

pub use artifact::{load_model, save_model, ArtifactError, FORMAT_VERSION};
pub use features::{
    build_features, rows_from_values, FeatureRow, Normalization, INPUT_DIM, MONTHS,
};
pub use gru::{gru_step, GruParameters, WindowGradient};
pub use model::{predict_horizon, ForecastModel, Forecaster, TrainReport};
pub use train::{one_step_predictions, split_windows, train, AdamConfig, TrainConfig, WindowSplit};

#[derive(Debug, Error, PartialEq)]
pub enum ForecastError {
    #[error("{what}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite values in `{0}`")]
    NonFinite(&'static str),
    #[error("window must hold {expected} rows, got {got}")]
    WindowLength { expected: usize, got: usize },
    #[error("series of length {len} is too short, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("feature alignment: {0}")]
    Alignment(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}
