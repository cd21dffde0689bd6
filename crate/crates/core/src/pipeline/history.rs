use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::eventlog::{EventLog, Trace};
use crate::replay::{
    build_variant_catalog, frequency_filter, RunningOrder, TraceVariant, VariantCatalog,
};

/// The log as seen at the end of `cutoff`, split into finished history and
/// orders still in progress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    /// Last day of observed data; always a Sunday.
    pub cutoff: NaiveDate,
    /// Monday after `cutoff`; first day anything is planned on.
    pub forecast_start: NaiveDate,
    pub running: Vec<RunningOrder>,
    /// Variants of the finished traces.
    pub catalog: VariantCatalog,
}

/// Last Sunday on or before `date`.
pub fn week_cutoff(date: NaiveDate) -> NaiveDate {
    let back = (date.weekday().num_days_from_monday() + 1) % 7;
    date - Duration::days(back as i64)
}

/// Activities that end the frequent variants of each type. A variant that is
/// a proper prefix of another one looks unfinished and is left out first.
fn terminal_activities(catalog: &VariantCatalog, mass: f64) -> BTreeMap<String, BTreeSet<String>> {
    catalog
        .article_types()
        .map(|t| {
            let variants = catalog.variants(t).unwrap_or_default();
            let whole: Vec<TraceVariant> = variants
                .iter()
                .filter(|v| {
                    !variants.iter().any(|w| {
                        w.signature.len() > v.signature.len()
                            && w.signature.starts_with(&v.signature)
                    })
                })
                .cloned()
                .collect();
            let ends = frequency_filter(&whole, mass)
                .unwrap_or_default()
                .iter()
                .filter_map(|v| v.signature.last().cloned())
                .collect();
            (t.to_string(), ends)
        })
        .collect()
}

/// Splits `log` at the end of the last full week on or before `as_of`.
///
/// A case that started by the cutoff is running if it has activities after
/// the cutoff, or if its last activity so far does not end any of its
/// type's frequent variants (those covering `mass` of the cases with no
/// activity after the cutoff). Everything else that started by the cutoff
/// is history.
pub fn split_history(log: &EventLog, as_of: NaiveDate, mass: f64) -> History {
    let cutoff = week_cutoff(as_of);
    debug_assert_eq!(cutoff.weekday(), Weekday::Sun);
    let forecast_start = cutoff + Duration::days(1);
    let started = |t: &Trace| t.events.first().is_some_and(|e| e.start_date() <= cutoff);
    let open_later = |t: &Trace| t.events.iter().any(|e| e.start_date() > cutoff);

    let looks_done = log.filter_traces(|t| started(t) && !open_later(t));
    let terminal = looks_done
        .as_ref()
        .map(|l| terminal_activities(&build_variant_catalog(l), mass))
        .unwrap_or_default();
    let is_running = |t: &Trace| {
        started(t)
            && (open_later(t)
                || t.events
                    .iter()
                    .rev()
                    .find(|e| e.start_date() <= cutoff)
                    .is_none_or(|e| {
                        !terminal
                            .get(&t.article_type)
                            .is_some_and(|s| s.contains(&e.activity))
                    }))
    };

    let running = log
        .traces()
        .iter()
        .filter(|t| is_running(t))
        .map(|t| RunningOrder {
            case_id: t.case_id.clone(),
            article_type: t.article_type.clone(),
            executed: Trace::new(
                t.case_id.clone(),
                t.events
                    .iter()
                    .filter(|e| e.start_date() <= cutoff)
                    .cloned()
                    .collect(),
            ),
            as_of: forecast_start,
        })
        .collect();
    let catalog = log
        .filter_traces(|t| started(t) && !is_running(t))
        .map(|l| build_variant_catalog(&l))
        .unwrap_or_default();
    History {
        cutoff,
        forecast_start,
        running,
        catalog,
    }
}
