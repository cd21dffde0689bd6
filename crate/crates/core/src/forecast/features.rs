use std::collections::BTreeSet;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::ForecastError;
use crate::eventlog::EventLog;
use crate::workload::{monday_of, Step, WorkloadSeries};

pub const MONTHS: usize = 12;
/// value + month one-hot + unique customers + unique countries
pub const INPUT_DIM: usize = 1 + MONTHS + 2;

/// One weekly observation with its exogenous features, in raw units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    /// Monday of the week.
    pub week_start: NaiveDate,
    pub value: f64,
    /// Calendar month (1-12) of `week_start`.
    pub month: u32,
    pub unique_customers: f64,
    pub unique_countries: f64,
}

impl FeatureRow {
    pub fn new(
        week_start: NaiveDate,
        value: f64,
        unique_customers: f64,
        unique_countries: f64,
    ) -> Self {
        FeatureRow {
            week_start,
            value,
            month: week_start.month(),
            unique_customers,
            unique_countries,
        }
    }

    pub fn month_onehot(&self) -> [f64; MONTHS] {
        let mut out = [0.0; MONTHS];
        out[(self.month as usize - 1) % MONTHS] = 1.0;
        out
    }

    /// The row one week later with `value` replaced; exogenous counts are
    /// carried forward and the month follows the calendar.
    pub fn advance(&self, value: f64) -> FeatureRow {
        FeatureRow::new(
            self.week_start + Duration::days(7),
            value,
            self.unique_customers,
            self.unique_countries,
        )
    }
}

/// Builds one row per week of `demand`, counting distinct customers and
/// countries among that week's order events of the same article type.
pub fn build_features(
    demand: &WorkloadSeries,
    log: &EventLog,
) -> Result<Vec<FeatureRow>, ForecastError> {
    let series = &demand.series;
    if series.step != Step::Week {
        return Err(ForecastError::Alignment(
            "demand series must be weekly".into(),
        ));
    }
    let mut customers: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); series.len()];
    let mut countries: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); series.len()];
    for e in log
        .events()
        .filter(|e| e.article_type == demand.article_type && e.quantity > 0)
    {
        let week = monday_of(e.start_date());
        let i = series.index_of(week).ok_or_else(|| {
            ForecastError::Alignment(format!(
                "order on {} outside demand series {}..{}",
                e.start_date(),
                series.start_date,
                series.date_at(series.len().saturating_sub(1))
            ))
        })?;
        if let Some(c) = &e.customer_id {
            customers[i].insert(c);
        }
        if let Some(c) = &e.country {
            countries[i].insert(c);
        }
    }
    Ok(series
        .dates()
        .zip(&series.values)
        .zip(customers.iter().zip(&countries))
        .map(|((d, v), (cu, co))| FeatureRow::new(d, *v, cu.len() as f64, co.len() as f64))
        .collect())
}

/// Rows for a bare weekly value sequence without exogenous counts.
pub fn rows_from_values(start_monday: NaiveDate, values: &[f64]) -> Vec<FeatureRow> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| FeatureRow::new(start_monday + Duration::days(7 * i as i64), *v, 0.0, 0.0))
        .collect()
}

/// Z-score constants for the continuous features (value, customers,
/// countries). The month one-hot is passed through untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: [f64; 3],
    pub scale: [f64; 3],
}

impl Normalization {
    pub fn identity() -> Self {
        Normalization {
            mean: [0.0; 3],
            scale: [1.0; 3],
        }
    }

    /// Fits on `rows`; a zero spread gets scale 1.
    pub fn fit(rows: &[FeatureRow]) -> Self {
        let cols = |r: &FeatureRow| [r.value, r.unique_customers, r.unique_countries];
        let n = rows.len().max(1) as f64;
        let mut mean = [0.0; 3];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(cols(r)) {
                *m += v / n;
            }
        }
        let mut var = [0.0; 3];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(cols(r)).zip(mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let scale = var.map(|v| {
            let sd = v.sqrt();
            if sd > 1e-12 && sd.is_finite() {
                sd
            } else {
                1.0
            }
        });
        Normalization { mean, scale }
    }

    pub fn normalize_value(&self, v: f64) -> f64 {
        (v - self.mean[0]) / self.scale[0]
    }

    pub fn denormalize_value(&self, v: f64) -> f64 {
        v * self.scale[0] + self.mean[0]
    }

    pub fn input_vector(&self, row: &FeatureRow) -> Vec<f64> {
        let mut x = Vec::with_capacity(INPUT_DIM);
        x.push(self.normalize_value(row.value));
        x.extend_from_slice(&row.month_onehot());
        x.push((row.unique_customers - self.mean[1]) / self.scale[1]);
        x.push((row.unique_countries - self.mean[2]) / self.scale[2]);
        x
    }
}
