use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ReplayError;
use crate::eventlog::{EventLog, Trace};
use crate::mass_prefix_len;

/// Averaged position of one activity within a variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileStep {
    pub activity: String,
    /// Mean days between the trace's first start and this activity's start.
    pub mean_offset_days: f64,
    /// `mean_offset_days` rounded to whole days; used for scheduling.
    pub day_offset: i64,
    pub mean_duration_hours: f64,
    /// Most common unit across exemplars, ties to the smallest label.
    pub business_unit: String,
    pub resource_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceVariant {
    pub article_type: String,
    pub signature: Vec<String>,
    pub frequency: u64,
    /// Case ids in ascending order.
    pub exemplars: Vec<String>,
    pub offset_profile: Vec<ProfileStep>,
}

impl TraceVariant {
    pub fn total_duration_hours(&self) -> f64 {
        self.offset_profile
            .iter()
            .map(|s| s.mean_duration_hours)
            .sum()
    }
}

/// Variants per article type, most frequent first, ties by signature.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VariantCatalog {
    variants: BTreeMap<String, Vec<TraceVariant>>,
}

impl VariantCatalog {
    /// Catalog from prebuilt variants; orders them and drops later duplicates
    /// of a (type, signature) pair.
    pub fn from_variants(list: impl IntoIterator<Item = TraceVariant>) -> Self {
        let mut variants: BTreeMap<String, Vec<TraceVariant>> = BTreeMap::new();
        for v in list {
            let entry = variants.entry(v.article_type.clone()).or_default();
            if !entry.iter().any(|e| e.signature == v.signature) {
                entry.push(v);
            }
        }
        for list in variants.values_mut() {
            list.sort_by(|a, b| {
                b.frequency
                    .cmp(&a.frequency)
                    .then_with(|| a.signature.cmp(&b.signature))
            });
        }
        VariantCatalog { variants }
    }

    pub fn variants(&self, article_type: &str) -> Option<&[TraceVariant]> {
        self.variants.get(article_type).map(Vec::as_slice)
    }

    pub fn article_types(&self) -> impl Iterator<Item = &str> {
        self.variants.keys().map(String::as_str)
    }

    /// Stable id of the variant at `rank` (0-based) of a type.
    pub fn variant_id(article_type: &str, rank: usize) -> String {
        format!("{article_type}/v{}", rank + 1)
    }
}

fn mode<'a>(labels: impl Iterator<Item = &'a str>) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let mut best: Option<(&str, usize)> = None;
    for (l, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((l, c));
        }
    }
    best.map(|(l, _)| l.to_string()).unwrap_or_default()
}

fn profile(traces: &[&Trace]) -> Vec<ProfileStep> {
    let n = traces.len() as f64;
    let len = traces[0].len();
    (0..len)
        .map(|j| {
            let mut offset = 0.0;
            let mut duration = 0.0;
            for t in traces {
                let origin = t.events[0].start_date();
                offset += (t.events[j].start_date() - origin).num_days() as f64;
                duration += t.events[j].duration_hours;
            }
            let mean_offset_days = offset / n;
            ProfileStep {
                activity: traces[0].events[j].activity.clone(),
                mean_offset_days,
                day_offset: mean_offset_days.round() as i64,
                mean_duration_hours: duration / n,
                business_unit: mode(traces.iter().map(|t| t.events[j].business_unit.as_str())),
                resource_class: mode(traces.iter().map(|t| t.events[j].resource.as_str())),
            }
        })
        .collect()
}

/// Groups the log's traces by article type and signature.
pub fn build_variant_catalog(log: &EventLog) -> VariantCatalog {
    let mut groups: BTreeMap<(&str, Vec<String>), Vec<&Trace>> = BTreeMap::new();
    for t in log.traces().iter().filter(|t| !t.is_empty()) {
        groups
            .entry((t.article_type.as_str(), t.signature()))
            .or_default()
            .push(t);
    }
    VariantCatalog::from_variants(
        groups
            .into_iter()
            .map(|((article_type, signature), traces)| TraceVariant {
                article_type: article_type.to_string(),
                signature,
                frequency: traces.len() as u64,
                exemplars: traces.iter().map(|t| t.case_id.clone()).collect(),
                offset_profile: profile(&traces),
            }),
    )
}

/// Shortest most-frequent-first prefix of `variants` whose share of the
/// total frequency reaches `mass`.
pub fn frequency_filter(
    variants: &[TraceVariant],
    mass: f64,
) -> Result<&[TraceVariant], ReplayError> {
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(ReplayError::InvalidMass(mass));
    }
    let freqs: Vec<u64> = variants.iter().map(|v| v.frequency).collect();
    Ok(&variants[..mass_prefix_len(&freqs, mass)])
}
