use chrono::{Duration, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    frequency_filter, PlannedActivity, Provenance, ReplayError, TraceVariant, VariantCatalog,
};

/// Draws `quantity` indices into `retained` with probability proportional
/// to frequency.
pub fn sample_variants<R: Rng + ?Sized>(
    retained: &[TraceVariant],
    quantity: u64,
    rng: &mut R,
) -> Vec<usize> {
    if quantity == 0 || retained.is_empty() {
        return Vec::new();
    }
    let dist = WeightedIndex::new(retained.iter().map(|v| v.frequency))
        .expect("retained frequencies are positive");
    (0..quantity).map(|_| dist.sample(rng)).collect()
}

/// Activities for `quantity` new orders received in the week starting at
/// `week_start`. Each order replays a variant drawn from the `mass`-filtered
/// catalog, keeping the historical day offsets and mean durations.
pub fn sample_new_order_activities(
    catalog: &VariantCatalog,
    article_type: &str,
    quantity: u64,
    week_start: NaiveDate,
    seed: u64,
    mass: f64,
) -> Result<Vec<PlannedActivity>, ReplayError> {
    let variants = catalog
        .variants(article_type)
        .ok_or_else(|| ReplayError::UnknownArticleType(article_type.to_string()))?;
    let retained = frequency_filter(variants, mass)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (order, rank) in sample_variants(retained, quantity, &mut rng)
        .into_iter()
        .enumerate()
    {
        let variant_id = VariantCatalog::variant_id(article_type, rank);
        for step in retained[rank]
            .offset_profile
            .iter()
            .filter(|s| s.mean_duration_hours > 0.0)
        {
            out.push(PlannedActivity {
                activity: step.activity.clone(),
                article_type: article_type.to_string(),
                business_unit: step.business_unit.clone(),
                planned_date: week_start + Duration::days(step.day_offset),
                planned_duration_hours: step.mean_duration_hours,
                provenance: Provenance::NewOrder {
                    variant_id: variant_id.clone(),
                    order,
                },
            });
        }
    }
    Ok(out)
}
