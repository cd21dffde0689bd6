use serde::{Deserialize, Serialize};

use super::features::{FeatureRow, Normalization};
use super::gru::{self, GruParameters, WindowGradient};
use super::train::TrainConfig;
use super::ForecastError;

/// Per-epoch training loss and held-out scores.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainReport {
    /// Training RMSE per epoch, in normalized units.
    pub epoch_losses: Vec<f64>,
    /// One-step RMSE on the held-out windows, in original units.
    pub test_rmse: Option<f64>,
    /// One-step MAPE (percent) on held-out windows with nonzero actuals.
    pub test_mape: Option<f64>,
    /// Held-out points skipped by MAPE because the actual was zero.
    pub test_mape_skipped: usize,
    /// Target row indices `[start, end)` of the training windows.
    pub train_targets: (usize, usize),
    /// Target row indices `[start, end)` of the held-out windows.
    pub test_targets: (usize, usize),
}

/// A trained one-step-ahead regressor for one article type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub article_type: String,
    pub params: GruParameters,
    pub config: TrainConfig,
    pub normalization: Normalization,
    pub train_report: TrainReport,
}

/// Anything that maps a window of feature rows to the next value.
pub trait Forecaster {
    fn window_len(&self) -> usize;

    /// Prediction for the week after the window's last row, in original units.
    fn predict_next(&self, window: &[FeatureRow]) -> Result<f64, ForecastError>;
}

impl ForecastModel {
    fn inputs(&self, window: &[FeatureRow]) -> Result<Vec<Vec<f64>>, ForecastError> {
        if window.len() != self.config.window {
            return Err(ForecastError::WindowLength {
                expected: self.config.window,
                got: window.len(),
            });
        }
        Ok(window
            .iter()
            .map(|r| self.normalization.input_vector(r))
            .collect())
    }

    /// Denormalized head output after running the GRU over `window`.
    /// Dropout is never applied here.
    pub fn forward(&self, window: &[FeatureRow]) -> Result<f64, ForecastError> {
        let inputs = self.inputs(window)?;
        let y = gru::predict(&self.params, &inputs)?;
        Ok(self.normalization.denormalize_value(y))
    }

    /// Gradient of the squared error in normalized units for one window.
    pub fn gradients(
        &self,
        window: &[FeatureRow],
        target: f64,
    ) -> Result<WindowGradient, ForecastError> {
        let inputs = self.inputs(window)?;
        gru::gradients(
            &self.params,
            &inputs,
            self.normalization.normalize_value(target),
        )
    }
}

impl Forecaster for ForecastModel {
    fn window_len(&self) -> usize {
        self.config.window
    }

    fn predict_next(&self, window: &[FeatureRow]) -> Result<f64, ForecastError> {
        self.forward(window)
    }
}

/// Multi-step forecast by re-injection: each clamped prediction becomes the
/// newest observation of the next window.
///
/// Future exogenous rows come from `exogenous_future` when given (their
/// `value` is ignored); otherwise the last row's counts are carried forward
/// and the month follows the calendar.
pub fn predict_horizon<F: Forecaster + ?Sized>(
    model: &F,
    last_rows: &[FeatureRow],
    horizon: usize,
    exogenous_future: Option<&[FeatureRow]>,
) -> Result<Vec<f64>, ForecastError> {
    let k = model.window_len();
    if last_rows.len() < k {
        return Err(ForecastError::WindowLength {
            expected: k,
            got: last_rows.len(),
        });
    }
    let mut window: Vec<FeatureRow> = last_rows[last_rows.len() - k..].to_vec();
    let mut out = Vec::with_capacity(horizon);
    for step in 0..horizon {
        let y = model.predict_next(&window)?.max(0.0);
        out.push(y);
        let last = window.last().expect("window is non-empty");
        let next = match exogenous_future.and_then(|f| f.get(step)) {
            Some(row) => FeatureRow {
                value: y,
                ..row.clone()
            },
            None => last.advance(y),
        };
        window.remove(0);
        window.push(next);
    }
    Ok(out)
}
