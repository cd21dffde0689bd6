use serde::{Deserialize, Serialize};

use super::{prepare_features, PipelineError, SeriesPrep};
use crate::eventlog::EventLog;
use crate::forecast::{
    one_step_predictions, predict_horizon, split_windows, train, FeatureRow, ForecastError,
    Forecaster, TrainConfig, WindowSplit,
};
use crate::metrics::{mape, rmse};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub train: TrainConfig,
    pub prep: SeriesPrep,
    /// Weeks of re-injected prediction scored from the start of the test
    /// region; shortened to the test length when that is smaller.
    pub horizon_weeks: usize,
    /// Empty means every type in the log.
    pub article_types: Vec<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            train: TrainConfig::default(),
            prep: SeriesPrep::default(),
            horizon_weeks: 41,
            article_types: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeEval {
    pub article_type: String,
    pub one_step_rmse: f64,
    /// Percent; `None` when every test actual is zero.
    pub one_step_mape: Option<f64>,
    pub one_step_mape_skipped: usize,
    /// RMSE of repeating the previous week's value.
    pub last_value_rmse: f64,
    pub horizon_weeks: usize,
    pub horizon_mape: Option<f64>,
    pub horizon_mape_skipped: usize,
    pub train_targets: (usize, usize),
    pub test_targets: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedType {
    pub article_type: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_type: Vec<TypeEval>,
    pub skipped: Vec<SkippedType>,
    /// Unweighted means over `per_type`, leaving out undefined values.
    pub macro_rmse: Option<f64>,
    pub macro_mape: Option<f64>,
    pub macro_horizon_mape: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn score<F: Forecaster>(
    article_type: &str,
    rows: &[FeatureRow],
    split: &WindowSplit,
    model: &F,
    horizon: usize,
) -> Result<TypeEval, ForecastError> {
    let (actual, predicted) = one_step_predictions(model, rows, split.test.clone())?;
    let baseline: Vec<f64> = split.test.clone().map(|t| rows[t - 1].value).collect();
    let one_step_mape = mape(&actual, &predicted).ok();

    let h = horizon.min(split.test.len());
    let start = split.test.start;
    let future = predict_horizon(model, &rows[..start], h, None)?;
    let horizon_actual: Vec<f64> = rows[start..start + h].iter().map(|r| r.value).collect();
    let horizon_mape = mape(&horizon_actual, &future).ok();

    Ok(TypeEval {
        article_type: article_type.to_string(),
        one_step_rmse: rmse(&actual, &predicted).expect("test split is non-empty"),
        one_step_mape: one_step_mape.map(|m| m.value),
        one_step_mape_skipped: one_step_mape.map_or(actual.len(), |m| m.skipped),
        last_value_rmse: rmse(&actual, &baseline).expect("test split is non-empty"),
        horizon_weeks: h,
        horizon_mape: horizon_mape.map(|m| m.value),
        horizon_mape_skipped: horizon_mape.map_or(h, |m| m.skipped),
        train_targets: (split.train.start, split.train.end),
        test_targets: (split.test.start, split.test.end),
    })
}

/// Scores models produced by `fit` on each type's chronological test split.
///
/// `fit` sees the full row history and the split it must respect. Types
/// whose series cannot be split or fitted are recorded in `skipped`.
pub fn evaluate_with<F, Fit>(
    log: &EventLog,
    config: &EvalConfig,
    mut fit: Fit,
) -> Result<EvalReport, PipelineError>
where
    F: Forecaster,
    Fit: FnMut(&str, &[FeatureRow], &WindowSplit) -> Result<F, ForecastError>,
{
    let known = log.article_types();
    let types = if config.article_types.is_empty() {
        known
    } else {
        if let Some(t) = config.article_types.iter().find(|t| !known.contains(t)) {
            return Err(PipelineError::UnknownArticleType(t.clone()));
        }
        config.article_types.clone()
    };
    let mut per_type = Vec::new();
    let mut skipped = Vec::new();
    for t in types {
        let rows = prepare_features(log, &t, &config.prep)?;
        let result = split_windows(rows.len(), config.train.window, config.train.test_fraction)
            .and_then(|split| {
                let model = fit(&t, &rows, &split)?;
                score(&t, &rows, &split, &model, config.horizon_weeks)
            });
        match result {
            Ok(e) => per_type.push(e),
            Err(e) => skipped.push(SkippedType {
                article_type: t,
                reason: e.to_string(),
            }),
        }
    }
    Ok(EvalReport {
        macro_rmse: mean(per_type.iter().map(|e| e.one_step_rmse)),
        macro_mape: mean(per_type.iter().filter_map(|e| e.one_step_mape)),
        macro_horizon_mape: mean(per_type.iter().filter_map(|e| e.horizon_mape)),
        per_type,
        skipped,
    })
}

/// Trains one model per type with `config.train` and scores it.
pub fn evaluate(log: &EventLog, config: &EvalConfig) -> Result<EvalReport, PipelineError> {
    evaluate_with(log, config, |t, rows, _| train(t, rows, &config.train))
}
