//! Event logs: activity records, case-grouped traces, validation and
//! directly-follows process graphs.

mod graph;
mod parse;
mod validate;

use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{build_process_graph, export_graph, GraphEdge, GraphNode, ProcessGraph};
pub use parse::{parse_log, write_log, LogSchema};
pub use validate::{validate_log, ValidationConfig};

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("missing mandatory column `{0}`")]
    MissingColumn(String),
    #[error("schema needs an `end` or a `duration_hours` column")]
    NoDurationColumn,
    #[error("log contains no usable rows ({rejected} rejected)")]
    EmptyLog { rejected: usize },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("graph filter threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
}

/// One logged activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub case_id: String,
    pub activity: String,
    pub start: NaiveDateTime,
    /// Always populated: either read from the log or `start + duration`.
    pub end: NaiveDateTime,
    pub duration_hours: f64,
    pub resource: String,
    pub business_unit: String,
    pub article_type: String,
    /// Order positions carried by this event; 0 for non-order events.
    pub quantity: u32,
    pub customer_id: Option<String>,
    pub country: Option<String>,
}

impl EventRecord {
    pub fn start_date(&self) -> NaiveDate {
        self.start.date()
    }

    /// Calendar days touched by the activity. An end exactly at midnight
    /// does not count the following day.
    pub fn spanned_days(&self) -> Vec<NaiveDate> {
        let first = self.start.date();
        let mut last = self.end.date();
        if self.end > self.start && self.end.time() == chrono::NaiveTime::MIN {
            last = last.pred_opt().unwrap_or(last);
        }
        first
            .iter_days()
            .take_while(|d| *d <= last.max(first))
            .collect()
    }

    fn ordering_key(&self) -> (NaiveDateTime, &str, NaiveDateTime, &str) {
        (self.start, &self.activity, self.end, &self.resource)
    }
}

/// Events of one case, sorted by start time with ties broken by activity label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub article_type: String,
    pub events: Vec<EventRecord>,
}

impl Trace {
    pub fn new(case_id: impl Into<String>, mut events: Vec<EventRecord>) -> Self {
        events.sort_by(|a, b| a.ordering_key().cmp(&b.ordering_key()));
        let article_type = events
            .first()
            .map(|e| e.article_type.clone())
            .unwrap_or_default();
        Trace {
            case_id: case_id.into(),
            article_type,
            events,
        }
    }

    /// The trace as a string of activity labels.
    pub fn signature(&self) -> Vec<String> {
        self.events.iter().map(|e| e.activity.clone()).collect()
    }

    pub fn first_start(&self) -> Option<NaiveDateTime> {
        self.events.first().map(|e| e.start)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// A problem found while parsing or validating a log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    RejectedRow {
        line: u64,
        reason: String,
    },
    MixedArticleType {
        case_id: String,
    },
    PeriodTooShort {
        days: i64,
        minimum: i64,
    },
    MissingDuration {
        case_id: String,
        activity: String,
    },
    SingletonTrace {
        case_id: String,
    },
    SparseArticleType {
        article_type: String,
        traces: usize,
        minimum: usize,
    },
}

/// Immutable collection of traces, one per case id, ordered by case id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    traces: Vec<Trace>,
    period: (NaiveDateTime, NaiveDateTime),
    validation_report: Vec<ValidationIssue>,
}

impl EventLog {
    /// Groups records by case id. Fails only when `records` is empty.
    pub fn from_records(
        records: Vec<EventRecord>,
        mut report: Vec<ValidationIssue>,
    ) -> Result<Self, EventLogError> {
        let rejected = report
            .iter()
            .filter(|i| matches!(i, ValidationIssue::RejectedRow { .. }))
            .count();
        if records.is_empty() {
            return Err(EventLogError::EmptyLog { rejected });
        }
        let mut period = (records[0].start, records[0].end);
        let mut by_case: BTreeMap<String, Vec<EventRecord>> = BTreeMap::new();
        for r in records {
            period.0 = period.0.min(r.start);
            period.1 = period.1.max(r.end);
            by_case.entry(r.case_id.clone()).or_default().push(r);
        }
        let traces: Vec<Trace> = by_case
            .into_iter()
            .map(|(case, events)| Trace::new(case, events))
            .collect();
        for t in &traces {
            if t.events.iter().any(|e| e.article_type != t.article_type) {
                report.push(ValidationIssue::MixedArticleType {
                    case_id: t.case_id.clone(),
                });
            }
        }
        Ok(EventLog {
            traces,
            period,
            validation_report: report,
        })
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn trace(&self, case_id: &str) -> Option<&Trace> {
        self.traces
            .binary_search_by(|t| t.case_id.as_str().cmp(case_id))
            .ok()
            .map(|i| &self.traces[i])
    }

    /// `(earliest start, latest end)` over all events.
    pub fn period(&self) -> (NaiveDateTime, NaiveDateTime) {
        self.period
    }

    /// Issues collected while the log was parsed.
    pub fn validation_report(&self) -> &[ValidationIssue] {
        &self.validation_report
    }

    pub fn events(&self) -> impl Iterator<Item = &EventRecord> {
        self.traces.iter().flat_map(|t| t.events.iter())
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    /// Sorted distinct article types.
    pub fn article_types(&self) -> Vec<String> {
        let mut types: Vec<String> = self.traces.iter().map(|t| t.article_type.clone()).collect();
        types.sort();
        types.dedup();
        types
    }

    pub fn business_units(&self) -> Vec<String> {
        let mut units: Vec<String> = self.events().map(|e| e.business_unit.clone()).collect();
        units.sort();
        units.dedup();
        units
    }

    /// A new log keeping only events for which `keep` holds. Returns `None`
    /// when nothing survives.
    pub fn filter_events(
        &self,
        mut keep: impl FnMut(&Trace, &EventRecord) -> bool,
    ) -> Option<EventLog> {
        let records: Vec<EventRecord> = self
            .traces
            .iter()
            .flat_map(|t| t.events.iter().map(move |e| (t, e)))
            .filter(|(t, e)| keep(t, e))
            .map(|(_, e)| e.clone())
            .collect();
        EventLog::from_records(records, Vec::new()).ok()
    }

    /// A new log keeping only whole traces for which `keep` holds.
    pub fn filter_traces(&self, mut keep: impl FnMut(&Trace) -> bool) -> Option<EventLog> {
        let records: Vec<EventRecord> = self
            .traces
            .iter()
            .filter(|t| keep(t))
            .flat_map(|t| t.events.iter().cloned())
            .collect();
        EventLog::from_records(records, Vec::new()).ok()
    }
}
