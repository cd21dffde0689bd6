use chrono::Duration;
use serde::{Deserialize, Serialize};

use super::{
    prefix_distances, PlannedActivity, Provenance, ReplayError, RunningOrder, TraceVariant,
    VariantCatalog,
};

/// Best match of an executed prefix against one catalog variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    /// Index into the type's variant list.
    pub rank: usize,
    /// Number of variant activities matched against the executed part.
    pub prefix_len: usize,
    pub distance: usize,
}

/// Variant and prefix length minimizing the edit distance between
/// `executed` and the variant's prefix. Prefixes at least as long as
/// `executed` are considered (the whole variant if it is shorter).
///
/// Ties prefer higher frequency, then the shorter remainder, then the
/// smaller signature.
pub fn best_alignment(executed: &[String], variants: &[TraceVariant]) -> Option<Alignment> {
    let mut best: Option<(Alignment, &TraceVariant)> = None;
    for (rank, v) in variants.iter().enumerate() {
        let row = prefix_distances(executed, &v.signature);
        let n = v.signature.len();
        for p in executed.len().min(n)..=n {
            let cand = Alignment {
                rank,
                prefix_len: p,
                distance: row[p],
            };
            let better = match &best {
                None => true,
                Some((b, bv)) => {
                    let key = |a: &Alignment, v: &TraceVariant| {
                        (
                            a.distance,
                            std::cmp::Reverse(v.frequency),
                            v.signature.len() - a.prefix_len,
                        )
                    };
                    match key(&cand, v).cmp(&key(b, bv)) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Greater => false,
                        std::cmp::Ordering::Equal => v.signature < bv.signature,
                    }
                }
            };
            if better {
                best = Some((cand, v));
            }
        }
    }
    best.map(|(a, _)| a)
}

/// Remaining activities of a running order, replayed from the best-aligned
/// historical variant of its article type.
///
/// Each remaining step is dated `as_of` plus its day offset past the last
/// matched step, so nothing is planned before `as_of`.
pub fn complete_running_order(
    order: &RunningOrder,
    catalog: &VariantCatalog,
) -> Result<Vec<PlannedActivity>, ReplayError> {
    if order.executed.is_empty() {
        return Err(ReplayError::EmptyExecuted(order.case_id.clone()));
    }
    let variants = catalog
        .variants(&order.article_type)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| ReplayError::NoHistory(order.article_type.clone()))?;
    let a = best_alignment(&order.executed.signature(), variants).expect("variants are non-empty");
    let profile = &variants[a.rank].offset_profile;
    let anchor = profile[a.prefix_len - 1].day_offset;
    Ok(profile[a.prefix_len..]
        .iter()
        .filter(|s| s.mean_duration_hours > 0.0)
        .map(|s| PlannedActivity {
            activity: s.activity.clone(),
            article_type: order.article_type.clone(),
            business_unit: s.business_unit.clone(),
            planned_date: order.as_of + Duration::days(s.day_offset - anchor),
            planned_duration_hours: s.mean_duration_hours,
            provenance: Provenance::RunningCompletion {
                case_id: order.case_id.clone(),
            },
        })
        .collect())
}
