//! Turns predicted order counts into activity plans by replaying historical
//! trace variants, and completes running orders by aligning them against
//! history.

mod catalog;
mod complete;
mod levenshtein;
mod sample;

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventlog::Trace;

pub use catalog::{
    build_variant_catalog, frequency_filter, ProfileStep, TraceVariant, VariantCatalog,
};
pub use complete::{best_alignment, complete_running_order, Alignment};
pub use levenshtein::{levenshtein, prefix_distances};
pub use sample::{sample_new_order_activities, sample_variants};

/// Share of trace mass kept when sampling new orders.
pub const DEFAULT_MASS: f64 = 0.8;

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("unknown article type `{0}`")]
    UnknownArticleType(String),
    #[error("no historical traces for article type `{0}`")]
    NoHistory(String),
    #[error("mass {0} outside (0, 1]")]
    InvalidMass(f64),
    #[error("running order `{0}` has no executed activities")]
    EmptyExecuted(String),
}

/// A case that started but has not finished by `as_of`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningOrder {
    pub case_id: String,
    pub article_type: String,
    /// Activities started on or before `as_of`.
    pub executed: Trace,
    pub as_of: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// `order` numbers the draws within one sampling call.
    NewOrder {
        variant_id: String,
        order: usize,
    },
    RunningCompletion {
        case_id: String,
    },
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::NewOrder { variant_id, order } => {
                write!(f, "new_order:{variant_id}#{order}")
            }
            Provenance::RunningCompletion { case_id } => write!(f, "running_completion:{case_id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedActivity {
    pub activity: String,
    pub article_type: String,
    pub business_unit: String,
    pub planned_date: NaiveDate,
    pub planned_duration_hours: f64,
    pub provenance: Provenance,
}

/// Writes `date,activity,business_unit,duration_hours,provenance` rows.
pub fn write_planned_csv<W: Write>(activities: &[PlannedActivity], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "date",
        "activity",
        "business_unit",
        "duration_hours",
        "provenance",
    ])?;
    for a in activities {
        w.write_record([
            a.planned_date.to_string(),
            a.activity.clone(),
            a.business_unit.clone(),
            a.planned_duration_hours.to_string(),
            a.provenance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
