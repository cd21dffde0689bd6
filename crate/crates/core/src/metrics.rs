//! Forecast error metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("series lengths differ: {actual} actual vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("metric needs at least one point")]
    Empty,
    #[error("MAPE undefined: every actual value is zero")]
    UndefinedMetric,
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<(), MetricError> {
    if actual.len() != predicted.len() {
        return Err(MetricError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check(actual, predicted)?;
    let mse = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum::<f64>()
        / actual.len() as f64;
    Ok(mse.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mape {
    /// Percent.
    pub value: f64,
    /// Points left out because the actual was zero.
    pub skipped: usize,
}

/// Mean absolute percentage error over points with a nonzero actual.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<Mape, MetricError> {
    check(actual, predicted)?;
    let terms: Vec<f64> = actual
        .iter()
        .zip(predicted)
        .filter(|(a, _)| **a != 0.0)
        .map(|(a, p)| (a - p).abs() / a.abs())
        .collect();
    if terms.is_empty() {
        return Err(MetricError::UndefinedMetric);
    }
    Ok(Mape {
        value: 100.0 * terms.iter().sum::<f64>() / terms.len() as f64,
        skipped: actual.len() - terms.len(),
    })
}
