use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EventLog, ValidationIssue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationConfig {
    /// Shortest acceptable log period.
    pub min_period_days: i64,
    /// Article types with fewer traces than this are flagged.
    pub min_traces_per_type: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            min_period_days: 365,
            min_traces_per_type: 10,
        }
    }
}

/// Checks a parsed log against the assumptions the forecasting method makes.
/// The returned report starts with the issues collected during parsing.
pub fn validate_log(log: &EventLog, config: &ValidationConfig) -> Vec<ValidationIssue> {
    let mut report = log.validation_report().to_vec();

    let (first, last) = log.period();
    let days = (last - first).num_days();
    if days < config.min_period_days {
        report.push(ValidationIssue::PeriodTooShort {
            days,
            minimum: config.min_period_days,
        });
    }

    let mut per_type: BTreeMap<&str, usize> = BTreeMap::new();
    for trace in log.traces() {
        *per_type.entry(trace.article_type.as_str()).or_default() += 1;
        if trace.len() == 1 {
            report.push(ValidationIssue::SingletonTrace {
                case_id: trace.case_id.clone(),
            });
        }
        // Zero-length activities carry no workload; usually an ERP default.
        for e in trace.events.iter().filter(|e| e.duration_hours <= 0.0) {
            report.push(ValidationIssue::MissingDuration {
                case_id: trace.case_id.clone(),
                activity: e.activity.clone(),
            });
        }
    }
    for (article_type, traces) in per_type {
        if traces < config.min_traces_per_type {
            report.push(ValidationIssue::SparseArticleType {
                article_type: article_type.to_string(),
                traces,
                minimum: config.min_traces_per_type,
            });
        }
    }
    report
}
