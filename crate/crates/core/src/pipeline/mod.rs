//! End-to-end forecasting: predict weekly orders per article type, replay
//! them into activities, complete running orders and aggregate the hours.

mod eval;
mod history;

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventlog::EventLog;
use crate::forecast::{build_features, predict_horizon, FeatureRow, ForecastError, Forecaster};
use crate::replay::{
    complete_running_order, sample_new_order_activities, PlannedActivity, ReplayError,
    RunningOrder, DEFAULT_MASS,
};
use crate::workload::{
    centered_exp_smooth, demand_series, monday_of, resample_weekly, triangular_smooth, Step,
    TimeSeries, WorkloadError,
};

pub use eval::{evaluate, evaluate_with, EvalConfig, EvalReport, SkippedType, TypeEval};
pub use history::{split_history, week_cutoff, History};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no model for article type `{0}`")]
    MissingModel(String),
    #[error("unknown article type `{0}`")]
    UnknownArticleType(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("article type `{article_type}`: {source}")]
    Forecast {
        article_type: String,
        source: ForecastError,
    },
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}

/// How weekly order counts are derived before they reach the regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeriesPrep {
    /// Triangular window in days applied to the daily counts before weekly
    /// resampling; `None` skips it.
    pub triangle_window_days: Option<usize>,
    /// Centered exponential span in weeks applied after resampling.
    pub exp_span_weeks: Option<usize>,
}

impl Default for SeriesPrep {
    fn default() -> Self {
        SeriesPrep {
            triangle_window_days: None,
            exp_span_weeks: Some(3),
        }
    }
}

/// Weekly feature rows for one article type.
pub fn prepare_features(
    log: &EventLog,
    article_type: &str,
    prep: &SeriesPrep,
) -> Result<Vec<FeatureRow>, PipelineError> {
    let mut demand = demand_series(log, article_type, Step::Day)?;
    if let Some(w) = prep.triangle_window_days {
        demand.series = triangular_smooth(&demand.series, w)?;
    }
    demand.series = resample_weekly(&demand.series);
    if let Some(span) = prep.exp_span_weeks {
        demand.series = centered_exp_smooth(&demand.series, span)?;
    }
    build_features(&demand, log).map_err(|source| PipelineError::Forecast {
        article_type: article_type.to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRequest {
    pub as_of: NaiveDate,
    pub horizon_weeks: usize,
    /// Empty means every type in the log.
    #[serde(default)]
    pub article_types: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub prep: SeriesPrep,
    /// Trace mass kept when sampling variants and choosing terminal activities.
    pub mass: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            prep: SeriesPrep::default(),
            mass: DEFAULT_MASS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekQuantity {
    pub week_start: NaiveDate,
    pub predicted: f64,
    /// `predicted` rounded half to even; the number of orders replayed.
    pub orders: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadForecast {
    pub request: ForecastRequest,
    pub cutoff: NaiveDate,
    pub forecast_start: NaiveDate,
    pub predicted_orders: BTreeMap<String, Vec<WeekQuantity>>,
    pub running_orders: Vec<RunningOrder>,
    pub new_order_activities: Vec<PlannedActivity>,
    pub running_completions: Vec<PlannedActivity>,
    /// Planned hours per business unit and week.
    pub aggregate: BTreeMap<String, TimeSeries>,
}

impl WorkloadForecast {
    /// New-order activities followed by running completions.
    pub fn activities(&self) -> impl Iterator<Item = &PlannedActivity> {
        self.new_order_activities
            .iter()
            .chain(&self.running_completions)
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Sampling seed for one (type, week); independent of which other types
/// are requested.
pub fn week_seed(seed: u64, article_type: &str, week: usize) -> u64 {
    splitmix(splitmix(seed ^ fnv1a(article_type)) ^ week as u64)
}

/// Sums each activity's hours into the Monday-based week of its planned
/// date, per business unit. Every unit in `units` gets a series; all series
/// start at `start` and cover at least `min_weeks`.
pub fn aggregate_weekly<'a>(
    activities: impl IntoIterator<Item = &'a PlannedActivity> + Clone,
    units: impl IntoIterator<Item = String>,
    start: NaiveDate,
    min_weeks: usize,
) -> BTreeMap<String, TimeSeries> {
    let start = monday_of(start);
    let week_of = |d: NaiveDate| ((monday_of(d) - start).num_days() / 7) as usize;
    let weeks = activities
        .clone()
        .into_iter()
        .map(|a| week_of(a.planned_date) + 1)
        .fold(min_weeks, usize::max);
    let mut out: BTreeMap<String, TimeSeries> = units
        .into_iter()
        .map(|u| (u, TimeSeries::new(start, Step::Week, vec![0.0; weeks])))
        .collect();
    for a in activities {
        let series = out
            .entry(a.business_unit.clone())
            .or_insert_with(|| TimeSeries::new(start, Step::Week, vec![0.0; weeks]));
        series.values[week_of(a.planned_date)] += a.planned_duration_hours;
    }
    out
}

fn requested_types(
    log: &EventLog,
    request: &ForecastRequest,
) -> Result<Vec<String>, PipelineError> {
    let known = log.article_types();
    if request.article_types.is_empty() {
        return Ok(known);
    }
    let mut types = request.article_types.clone();
    types.sort();
    types.dedup();
    match types.iter().find(|t| !known.contains(t)) {
        Some(t) => Err(PipelineError::UnknownArticleType(t.clone())),
        None => Ok(types),
    }
}

/// Runs the forecast for `request`. Order history is cut at the last Sunday
/// on or before `as_of`; new orders are predicted for the following
/// `horizon_weeks` weeks and every case open at the cutoff is completed.
pub fn run_pipeline<F: Forecaster>(
    log: &EventLog,
    request: &ForecastRequest,
    models: &BTreeMap<String, F>,
    config: &PipelineConfig,
) -> Result<WorkloadForecast, PipelineError> {
    if request.horizon_weeks == 0 {
        return Err(PipelineError::InvalidRequest(
            "horizon_weeks must be at least 1".into(),
        ));
    }
    let types = requested_types(log, request)?;
    if let Some(t) = types.iter().find(|t| !models.contains_key(*t)) {
        return Err(PipelineError::MissingModel(t.clone()));
    }
    let history = split_history(log, request.as_of, config.mass);
    let observed = log
        .filter_events(|_, e| e.start_date() <= history.cutoff)
        .ok_or_else(|| {
            PipelineError::InvalidRequest(format!("no events on or before {}", history.cutoff))
        })?;

    let mut predicted_orders = BTreeMap::new();
    let mut new_order_activities = Vec::new();
    for t in &types {
        let model = &models[t];
        let forecast_err = |source| PipelineError::Forecast {
            article_type: t.clone(),
            source,
        };
        let rows = prepare_features(&observed, t, &config.prep)?;
        let rows: Vec<FeatureRow> = rows
            .into_iter()
            .filter(|r| r.week_start + Duration::days(6) <= history.cutoff)
            .collect();
        let predicted =
            predict_horizon(model, &rows, request.horizon_weeks, None).map_err(forecast_err)?;
        let mut weeks = Vec::with_capacity(predicted.len());
        for (i, y) in predicted.into_iter().enumerate() {
            let week_start = history.forecast_start + Duration::weeks(i as i64);
            let orders = y.max(0.0).round_ties_even() as u64;
            if orders > 0 {
                new_order_activities.extend(sample_new_order_activities(
                    &history.catalog,
                    t,
                    orders,
                    week_start,
                    week_seed(request.seed, t, i),
                    config.mass,
                )?);
            }
            weeks.push(WeekQuantity {
                week_start,
                predicted: y,
                orders,
            });
        }
        predicted_orders.insert(t.clone(), weeks);
    }

    let running_orders: Vec<RunningOrder> = history
        .running
        .into_iter()
        .filter(|r| types.contains(&r.article_type))
        .collect();
    let mut running_completions = Vec::new();
    for order in &running_orders {
        running_completions.extend(complete_running_order(order, &history.catalog)?);
    }

    let aggregate = aggregate_weekly(
        new_order_activities.iter().chain(&running_completions),
        log.business_units(),
        history.forecast_start,
        request.horizon_weeks,
    );
    Ok(WorkloadForecast {
        request: request.clone(),
        cutoff: history.cutoff,
        forecast_start: history.forecast_start,
        predicted_orders,
        running_orders,
        new_order_activities,
        running_completions,
        aggregate,
    })
}
