//! Seeded synthetic event logs with sinusoidal weekly demand and templated
//! trace variants.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::{Duration, NaiveDate, NaiveTime};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventlog::{EventLog, EventRecord};
use crate::workload::monday_of;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("article type `{0}`: variant probabilities must be non-negative and sum to 1")]
    Probabilities(String),
    #[error("article type `{0}`: variant with no steps")]
    EmptyVariant(String),
    #[error("article type `{0}`: demand parameters must be finite with non-negative noise")]
    Demand(String),
    #[error("spec produced no events")]
    Empty,
}

/// Orders per week: `mean + amplitude * sin(2π (week + phase) / period)`
/// plus Gaussian noise, rounded and clamped at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandGenerator {
    pub mean: f64,
    pub amplitude: f64,
    pub period_weeks: f64,
    #[serde(default)]
    pub phase_weeks: f64,
    #[serde(default)]
    pub noise_sd: f64,
}

impl DemandGenerator {
    pub fn expected(&self, week: usize) -> f64 {
        self.mean
            + self.amplitude
                * (2.0 * PI * (week as f64 + self.phase_weeks) / self.period_weeks).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTemplate {
    pub activity: String,
    pub business_unit: String,
    pub resource: String,
    /// Days after the previous step's start.
    pub gap_days: i64,
    /// Up to this many extra days are added to the gap.
    #[serde(default)]
    pub gap_jitter_days: i64,
    pub duration_hours: f64,
    /// Relative spread of the duration, e.g. 0.2 for ±20%.
    #[serde(default)]
    pub duration_jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantTemplate {
    pub probability: f64,
    pub steps: Vec<StepTemplate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleTypeSpec {
    pub name: String,
    pub demand: DemandGenerator,
    pub variants: Vec<VariantTemplate>,
    #[serde(default = "default_customers")]
    pub customers: u32,
    #[serde(default = "default_countries")]
    pub countries: u32,
}

fn default_customers() -> u32 {
    40
}

fn default_countries() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticLogSpec {
    /// Moved back to its Monday.
    pub start: NaiveDate,
    pub weeks: usize,
    pub seed: u64,
    pub article_types: Vec<ArticleTypeSpec>,
}

pub struct SyntheticLog {
    pub log: EventLog,
    /// Orders drawn per type and week.
    pub demand: BTreeMap<String, Vec<u32>>,
}

fn check(spec: &SyntheticLogSpec) -> Result<(), SynthError> {
    for t in &spec.article_types {
        let total: f64 = t.variants.iter().map(|v| v.probability).sum();
        if t.variants.is_empty()
            || t.variants.iter().any(|v| !(v.probability >= 0.0))
            || (total - 1.0).abs() > 1e-9
        {
            return Err(SynthError::Probabilities(t.name.clone()));
        }
        if t.variants.iter().any(|v| v.steps.is_empty()) {
            return Err(SynthError::EmptyVariant(t.name.clone()));
        }
        let d = &t.demand;
        let finite = [
            d.mean,
            d.amplitude,
            d.period_weeks,
            d.phase_weeks,
            d.noise_sd,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite || d.noise_sd < 0.0 || d.period_weeks == 0.0 {
            return Err(SynthError::Demand(t.name.clone()));
        }
    }
    Ok(())
}

fn quarter_hours(h: f64) -> f64 {
    (h * 4.0).round().max(1.0) / 4.0
}

/// Generates one case per drawn order. Orders arrive on a weekday of their
/// week; each instantiates a template drawn by probability with jittered
/// gaps and durations. Events starting after the last day of the period
/// are dropped, which leaves the latest orders unfinished.
pub fn generate_synthetic_log(spec: &SyntheticLogSpec) -> Result<SyntheticLog, SynthError> {
    check(spec)?;
    let start = monday_of(spec.start);
    let last_day = start + Duration::days(7 * spec.weeks as i64 - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::new();
    let mut demand = BTreeMap::new();

    for t in &spec.article_types {
        let noise = Normal::new(0.0, t.demand.noise_sd).expect("checked");
        let pick = WeightedIndex::new(t.variants.iter().map(|v| v.probability)).expect("checked");
        let mut counts = Vec::with_capacity(spec.weeks);
        for week in 0..spec.weeks {
            let n = (t.demand.expected(week) + noise.sample(&mut rng))
                .round()
                .max(0.0) as u32;
            counts.push(n);
            let monday = start + Duration::weeks(week as i64);
            for k in 0..n {
                let case_id = format!("{}-{week:04}-{k:03}", t.name);
                let customer = rng.random_range(0..t.customers.max(1));
                let country = customer % t.countries.max(1);
                let mut day = monday + Duration::days(rng.random_range(0..5));
                let variant = &t.variants[pick.sample(&mut rng)];
                for (j, s) in variant.steps.iter().enumerate() {
                    let jitter = if s.gap_jitter_days > 0 {
                        rng.random_range(0..=s.gap_jitter_days)
                    } else {
                        0
                    };
                    day += Duration::days(s.gap_days + jitter);
                    let spread = if s.duration_jitter > 0.0 {
                        rng.random_range(-s.duration_jitter..=s.duration_jitter)
                    } else {
                        0.0
                    };
                    let hours = quarter_hours(s.duration_hours * (1.0 + spread));
                    if day > last_day {
                        continue;
                    }
                    // Staggered by the hour so same-day steps keep template order.
                    let begin = day.and_time(
                        NaiveTime::from_hms_opt(7 + j as u32, 0, 0).expect("fewer than 17 steps"),
                    );
                    records.push(EventRecord {
                        case_id: case_id.clone(),
                        activity: s.activity.clone(),
                        start: begin,
                        end: begin + Duration::minutes((hours * 60.0) as i64),
                        duration_hours: hours,
                        resource: s.resource.clone(),
                        business_unit: s.business_unit.clone(),
                        article_type: t.name.clone(),
                        quantity: u32::from(j == 0),
                        customer_id: Some(format!("{}-cust{customer:03}", t.name)),
                        country: Some(format!("country{country:02}")),
                    });
                }
            }
        }
        demand.insert(t.name.clone(), counts);
    }
    let log = EventLog::from_records(records, Vec::new()).map_err(|_| SynthError::Empty)?;
    Ok(SyntheticLog { log, demand })
}

fn step(activity: &str, unit: &str, gap: i64, jitter: i64, hours: f64) -> StepTemplate {
    StepTemplate {
        activity: activity.into(),
        business_unit: unit.into(),
        resource: format!("{unit}-team"),
        gap_days: gap,
        gap_jitter_days: jitter,
        duration_hours: hours,
        duration_jitter: 0.2,
    }
}

fn variant(probability: f64, steps: Vec<StepTemplate>) -> VariantTemplate {
    VariantTemplate { probability, steps }
}

impl Default for SyntheticLogSpec {
    /// 232 weeks of three article types sharing four business units.
    fn default() -> Self {
        let entry = || {
            vec![
                step("order_entry", "office", 0, 0, 1.0),
                step("credit_check", "office", 0, 0, 0.5),
            ]
        };
        let with = |mut head: Vec<StepTemplate>, tail: Vec<StepTemplate>| {
            head.extend(tail);
            head
        };
        SyntheticLogSpec {
            start: NaiveDate::from_ymd_opt(2016, 1, 4).expect("valid date"),
            weeks: 232,
            seed: 2017,
            article_types: vec![
                ArticleTypeSpec {
                    name: "pump".into(),
                    demand: DemandGenerator {
                        mean: 6.0,
                        amplitude: 2.5,
                        period_weeks: 52.0,
                        phase_weeks: 0.0,
                        noise_sd: 0.8,
                    },
                    variants: vec![
                        variant(
                            0.6,
                            with(
                                entry(),
                                vec![
                                    step("machining", "shop", 2, 1, 6.0),
                                    step("assembly", "assembly", 3, 1, 4.0),
                                    step("shipping", "logistics", 2, 0, 1.0),
                                ],
                            ),
                        ),
                        variant(
                            0.3,
                            with(
                                entry(),
                                vec![
                                    step("assembly", "assembly", 3, 1, 4.0),
                                    step("shipping", "logistics", 2, 0, 1.0),
                                ],
                            ),
                        ),
                        variant(
                            0.1,
                            with(
                                entry(),
                                vec![
                                    step("machining", "shop", 2, 1, 6.0),
                                    step("rework", "shop", 2, 1, 3.0),
                                    step("assembly", "assembly", 2, 1, 4.0),
                                    step("shipping", "logistics", 2, 0, 1.0),
                                ],
                            ),
                        ),
                    ],
                    customers: 60,
                    countries: 6,
                },
                ArticleTypeSpec {
                    name: "valve".into(),
                    demand: DemandGenerator {
                        mean: 10.0,
                        amplitude: 3.0,
                        period_weeks: 52.0,
                        phase_weeks: 13.0,
                        noise_sd: 1.0,
                    },
                    variants: vec![
                        variant(
                            0.75,
                            with(
                                entry(),
                                vec![
                                    step("casting", "shop", 1, 1, 3.0),
                                    step("shipping", "logistics", 3, 1, 0.5),
                                ],
                            ),
                        ),
                        variant(
                            0.25,
                            with(
                                entry(),
                                vec![
                                    step("casting", "shop", 1, 1, 3.0),
                                    step("pressure_test", "assembly", 2, 0, 1.5),
                                    step("shipping", "logistics", 2, 1, 0.5),
                                ],
                            ),
                        ),
                    ],
                    customers: 80,
                    countries: 8,
                },
                ArticleTypeSpec {
                    name: "gearbox".into(),
                    demand: DemandGenerator {
                        mean: 4.0,
                        amplitude: 1.5,
                        period_weeks: 26.0,
                        phase_weeks: 5.0,
                        noise_sd: 0.5,
                    },
                    variants: vec![
                        variant(
                            0.5,
                            with(
                                entry(),
                                vec![
                                    step("machining", "shop", 3, 2, 8.0),
                                    step("assembly", "assembly", 4, 2, 6.0),
                                    step("shipping", "logistics", 2, 0, 1.0),
                                ],
                            ),
                        ),
                        variant(
                            0.35,
                            with(
                                entry(),
                                vec![
                                    step("engineering", "office", 2, 1, 4.0),
                                    step("machining", "shop", 3, 2, 8.0),
                                    step("assembly", "assembly", 4, 2, 6.0),
                                    step("shipping", "logistics", 2, 0, 1.0),
                                ],
                            ),
                        ),
                        variant(
                            0.15,
                            with(
                                entry(),
                                vec![
                                    step("refurbish", "shop", 2, 1, 5.0),
                                    step("shipping", "logistics", 1, 0, 1.0),
                                ],
                            ),
                        ),
                    ],
                    customers: 25,
                    countries: 4,
                },
            ],
        }
    }
}
