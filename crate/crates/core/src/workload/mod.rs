//! Calendar-regular demand and supply series reconstructed from an event log.

mod smooth;

use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventlog::EventLog;

pub use smooth::{centered_exp_smooth, triangular_smooth, Kernel, EXP_DECAY};

#[derive(Debug, Error, PartialEq)]
pub enum WorkloadError {
    #[error("no events for article type `{0}`")]
    EmptySeries(String),
    #[error("smoothing window must be at least 1")]
    InvalidWindow,
    #[error("window {window} too large for a series of length {len}")]
    DegenerateWindow { window: usize, len: usize },
    #[error("span {0} must be odd and positive")]
    InvalidSpan(usize),
    #[error("series is empty")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Day,
    Week,
}

impl Step {
    pub fn days(self) -> i64 {
        match self {
            Step::Day => 1,
            Step::Week => 7,
        }
    }
}

/// Gap-free series on a daily or weekly calendar. Weekly series start on a
/// Monday.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub start_date: NaiveDate,
    pub step: Step,
    pub values: Vec<f64>,
    /// Set by weekly resampling when the first / last week is not fully
    /// covered by the daily input.
    #[serde(default)]
    pub partial_first: bool,
    #[serde(default)]
    pub partial_last: bool,
}

impl TimeSeries {
    pub fn new(start_date: NaiveDate, step: Step, values: Vec<f64>) -> Self {
        TimeSeries {
            start_date,
            step,
            values,
            partial_first: false,
            partial_last: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date_at(&self, i: usize) -> NaiveDate {
        self.start_date + Duration::days(self.step.days() * i as i64)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.len()).map(|i| self.date_at(i))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Index of the bin containing `date`, if inside the series.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let delta = (date - self.start_date).num_days();
        if delta < 0 {
            return None;
        }
        let i = (delta / self.step.days()) as usize;
        (i < self.len()).then_some(i)
    }

    /// Writes `date,value` rows with a header.
    pub fn write_csv<W: Write>(&self, sink: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["date", "value"])?;
        for (d, v) in self.dates().zip(&self.values) {
            w.write_record([d.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Demand,
    Supply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesUnit {
    OrderPositions,
    Hours,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSeries {
    pub article_type: String,
    pub business_unit: Option<String>,
    pub kind: SeriesKind,
    pub unit: SeriesUnit,
    pub series: TimeSeries,
}

pub fn monday_of(date: NaiveDate) -> NaiveDate {
    date - Duration::days(date.weekday().num_days_from_monday() as i64)
}

fn daily_frame(log: &EventLog) -> (NaiveDate, usize) {
    let (first, last) = log.period();
    let start = first.date();
    let len = (last.date() - start).num_days() as usize + 1;
    (start, len)
}

fn finish(series: TimeSeries, step: Step) -> TimeSeries {
    match step {
        Step::Day => series,
        Step::Week => resample_weekly(&series),
    }
}

/// Order positions per calendar bin, counted on the day each order event starts.
pub fn demand_series(
    log: &EventLog,
    article_type: &str,
    step: Step,
) -> Result<WorkloadSeries, WorkloadError> {
    let (start, len) = daily_frame(log);
    let mut values = vec![0.0; len];
    let mut seen = false;
    for e in log.events().filter(|e| e.article_type == article_type) {
        seen = true;
        let i = (e.start_date() - start).num_days() as usize;
        values[i] += e.quantity as f64;
    }
    if !seen {
        return Err(WorkloadError::EmptySeries(article_type.to_string()));
    }
    Ok(WorkloadSeries {
        article_type: article_type.to_string(),
        business_unit: None,
        kind: SeriesKind::Demand,
        unit: SeriesUnit::OrderPositions,
        series: finish(TimeSeries::new(start, Step::Day, values), step),
    })
}

/// Activity hours per calendar bin. An activity spanning several days
/// contributes an equal share of its duration to each day.
pub fn supply_series(
    log: &EventLog,
    article_type: &str,
    business_unit: Option<&str>,
    step: Step,
) -> Result<WorkloadSeries, WorkloadError> {
    let (start, len) = daily_frame(log);
    let mut values = vec![0.0; len];
    let mut seen = false;
    let events = log.events().filter(|e| {
        e.article_type == article_type && business_unit.is_none_or(|u| e.business_unit == u)
    });
    for e in events {
        seen = true;
        let days = e.spanned_days();
        let share = e.duration_hours / days.len() as f64;
        for d in days {
            values[(d - start).num_days() as usize] += share;
        }
    }
    if !seen {
        return Err(WorkloadError::EmptySeries(article_type.to_string()));
    }
    Ok(WorkloadSeries {
        article_type: article_type.to_string(),
        business_unit: business_unit.map(String::from),
        kind: SeriesKind::Supply,
        unit: SeriesUnit::Hours,
        series: finish(TimeSeries::new(start, Step::Day, values), step),
    })
}

/// Sums a daily series into Monday-based weeks. Weekly input is returned
/// unchanged.
pub fn resample_weekly(series: &TimeSeries) -> TimeSeries {
    if series.step == Step::Week || series.is_empty() {
        return series.clone();
    }
    let first_monday = monday_of(series.start_date);
    let last_date = series.date_at(series.len() - 1);
    let weeks = ((monday_of(last_date) - first_monday).num_days() / 7) as usize + 1;
    let mut values = vec![0.0; weeks];
    for (d, v) in series.dates().zip(&series.values) {
        values[((d - first_monday).num_days() / 7) as usize] += v;
    }
    TimeSeries {
        start_date: first_monday,
        step: Step::Week,
        values,
        partial_first: series.start_date != first_monday,
        partial_last: last_date.weekday() != chrono::Weekday::Sun,
    }
}

/// `x[i] - x[i-1]`; one element shorter than the input.
pub fn first_difference(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}
