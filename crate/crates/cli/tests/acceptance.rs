//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Every expected value is computed here, independently
//! of the library code under test.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use chrono::{Datelike, Duration as Days, NaiveDate};
use procload_core::forecast::gru::{self, GruParameters};
use procload_core::forecast::{
    load_model, predict_horizon, rows_from_values, save_model, train, FeatureRow, ForecastModel,
    TrainConfig, INPUT_DIM,
};
use procload_core::replay::{
    frequency_filter, levenshtein, prefix_distances, sample_new_order_activities, ProfileStep,
    Provenance, TraceVariant, VariantCatalog,
};
use procload_core::workload::{resample_weekly, Kernel, Step, TimeSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// Levenshtein

fn naive_lev(a: &[u8], b: &[u8]) -> usize {
    let (i, j) = (a.len(), b.len());
    if i.min(j) == 0 {
        return i.max(j);
    }
    let sub = usize::from(a[i - 1] != b[j - 1]);
    (naive_lev(&a[..i - 1], b) + 1)
        .min(naive_lev(a, &b[..j - 1]) + 1)
        .min(naive_lev(&a[..i - 1], &b[..j - 1]) + sub)
}

/// The same recurrence, cached on `(i, j)` so that length-12 pairs stay cheap.
fn memo_lev(a: &[u8], b: &[u8]) -> usize {
    fn go(
        a: &[u8],
        b: &[u8],
        i: usize,
        j: usize,
        memo: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        if i.min(j) == 0 {
            return i.max(j);
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let sub = usize::from(a[i - 1] != b[j - 1]);
        let d = (go(a, b, i - 1, j, memo) + 1)
            .min(go(a, b, i, j - 1, memo) + 1)
            .min(go(a, b, i - 1, j - 1, memo) + sub);
        memo.insert((i, j), d);
        d
    }
    go(a, b, a.len(), b.len(), &mut HashMap::new())
}

fn all_words(max_len: usize, alphabet: u8) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for c in 0..alphabet {
                let mut v: Vec<u8> = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn labels(w: &[u8]) -> Vec<String> {
    w.iter()
        .map(|c| ["pick", "weld", "ship"][*c as usize].to_string())
        .collect()
}

fn levenshtein_oracle() -> Outcome {
    let words = all_words(5, 3);
    let mut pairs = 0usize;
    for a in &words {
        let la = labels(a);
        for b in &words {
            let expected = naive_lev(a, b);
            let got = levenshtein(&la, &labels(b));
            ensure(got == expected, || {
                format!("{a:?} vs {b:?}: {got} != {expected}")
            })?;
            pairs += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10_000 {
        let word = |rng: &mut ChaCha8Rng| -> Vec<u8> {
            let n = rng.random_range(0..=12);
            (0..n).map(|_| rng.random_range(0..3)).collect()
        };
        let a = word(&mut rng);
        let b = word(&mut rng);
        let (la, lb) = (labels(&a), labels(&b));
        let expected = memo_lev(&a, &b);
        let got = levenshtein(&la, &lb);
        ensure(got == expected, || {
            format!("{a:?} vs {b:?}: {got} != {expected}")
        })?;
        let prefixes = prefix_distances(&la, &lb);
        for (p, d) in prefixes.iter().enumerate() {
            ensure(*d == memo_lev(&a, &b[..p]), || {
                format!("prefix {p} of {b:?} vs {a:?}")
            })?;
        }
    }
    Ok(format!("{pairs} exhaustive pairs, 10000 random pairs"))
}

// Gradient check

fn loss(p: &GruParameters, inputs: &[Vec<f64>], target: f64) -> f64 {
    let y = gru::predict(p, inputs).unwrap();
    (y - target) * (y - target)
}

fn gradient_check() -> Outcome {
    const STEP: f64 = 1e-5;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = GruParameters::init_uniform(3, 4, &mut rng);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let inputs: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| normal.sample(&mut rng)).collect())
            .collect();
        let target = normal.sample(&mut rng);
        let analytic = gru::gradients(&params, &inputs, target).unwrap().grads;
        let analytic: Vec<f64> = analytic.tensors().iter().flat_map(|t| t.to_vec()).collect();

        let mut numeric = Vec::with_capacity(analytic.len());
        let mut probe = params.clone();
        for tensor in 0..11 {
            for k in 0..params.tensors()[tensor].len() {
                let orig = probe.tensors()[tensor][k];
                probe.tensors_mut()[tensor][k] = orig + STEP;
                let up = loss(&probe, &inputs, target);
                probe.tensors_mut()[tensor][k] = orig - STEP;
                let down = loss(&probe, &inputs, target);
                probe.tensors_mut()[tensor][k] = orig;
                numeric.push((up - down) / (2.0 * STEP));
            }
        }
        ensure(numeric.len() == analytic.len(), || {
            "parameter count mismatch".into()
        })?;
        for (a, n) in analytic.iter().zip(&numeric) {
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-7);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    ensure(worst <= 1e-4, || format!("max relative error {worst:.3e}"))?;
    Ok(format!(
        "{checked} partials, max relative error {worst:.2e}"
    ))
}

// Synthetic forecasting

const SERIES_LEN: usize = 232;

fn sinusoid_rows() -> Vec<FeatureRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(232);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let values: Vec<f64> = (0..SERIES_LEN)
        .map(|t| 50.0 + 15.0 * (2.0 * PI * t as f64 / 52.0).sin() + noise.sample(&mut rng))
        .collect();
    rows_from_values(NaiveDate::from_ymd_opt(2016, 1, 4).unwrap(), &values)
}

fn mape_pct(actual: &[f64], predicted: &[f64]) -> f64 {
    let n = actual.len() as f64;
    100.0
        * actual
            .iter()
            .zip(predicted)
            .map(|(a, p)| ((a - p) / a).abs())
            .sum::<f64>()
        / n
}

fn rmse(actual: &[f64], predicted: &[f64]) -> f64 {
    let n = actual.len() as f64;
    (actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

struct Fitted {
    rows: Vec<FeatureRow>,
    model: ForecastModel,
    test_start: usize,
}

fn fit_sinusoid() -> Fitted {
    let rows = sinusoid_rows();
    let config = TrainConfig {
        window: 12,
        hidden_dim: 64,
        epochs: 100,
        test_fraction: 0.2,
        seed: 232,
        ..TrainConfig::default()
    };
    let model = train("synthetic", &rows, &config).unwrap();
    // 20% of the 220 windows, taken from the end.
    let test_start = SERIES_LEN - 44;
    Fitted {
        rows,
        model,
        test_start,
    }
}

fn synthetic_forecasting(f: &Fitted) -> Outcome {
    let k = 12;
    ensure(
        f.model.train_report.test_targets == (f.test_start, SERIES_LEN),
        || format!("test split {:?}", f.model.train_report.test_targets),
    )?;
    let actual: Vec<f64> = f.rows[f.test_start..].iter().map(|r| r.value).collect();
    let predicted: Vec<f64> = (f.test_start..SERIES_LEN)
        .map(|t| f.model.forward(&f.rows[t - k..t]).unwrap().max(0.0))
        .collect();
    let carry: Vec<f64> = (f.test_start..SERIES_LEN)
        .map(|t| f.rows[t - 1].value)
        .collect();
    let mape = mape_pct(&actual, &predicted);
    let model_rmse = rmse(&actual, &predicted);
    let carry_rmse = rmse(&actual, &carry);
    let detail =
        format!("one-step MAPE {mape:.2}%, RMSE {model_rmse:.3} vs carry-forward {carry_rmse:.3}");
    ensure(mape <= 10.0 && model_rmse < carry_rmse, || detail.clone())?;
    Ok(detail)
}

fn error_propagation(f: &Fitted) -> Outcome {
    const H: usize = 41;
    let k = 12;
    let start = f.test_start;
    let mut window: Vec<FeatureRow> = f.rows[start - k..start].to_vec();
    let mut reinjected = Vec::with_capacity(H);
    for _ in 0..H {
        let y = f.model.forward(&window).unwrap().max(0.0);
        reinjected.push(y);
        let last = window.last().unwrap();
        let next = FeatureRow::new(
            last.week_start + Days::days(7),
            y,
            last.unique_customers,
            last.unique_countries,
        );
        window.remove(0);
        window.push(next);
    }
    let library = predict_horizon(&f.model, &f.rows[..start], H, None).unwrap();
    ensure(library == reinjected, || {
        "library re-injection differs from oracle".into()
    })?;

    let actual: Vec<f64> = f.rows[start..start + H].iter().map(|r| r.value).collect();
    let one_step: Vec<f64> = (start..start + H)
        .map(|t| f.model.forward(&f.rows[t - k..t]).unwrap().max(0.0))
        .collect();
    let horizon_mape = mape_pct(&actual, &reinjected);
    let one_step_mape = mape_pct(&actual, &one_step);
    let detail = format!("{H}-step MAPE {horizon_mape:.2}% vs one-step {one_step_mape:.2}%");
    ensure(horizon_mape >= one_step_mape, || detail.clone())?;
    Ok(detail)
}

// Frequency filter

fn variant(article_type: &str, name: &str, frequency: u64, steps: &[(i64, f64)]) -> TraceVariant {
    let offset_profile: Vec<ProfileStep> = steps
        .iter()
        .enumerate()
        .map(|(i, (day, hours))| ProfileStep {
            activity: format!("{name}-{i}"),
            mean_offset_days: *day as f64,
            day_offset: *day,
            mean_duration_hours: *hours,
            business_unit: format!("bu{}", i % 3),
            resource_class: "r".into(),
        })
        .collect();
    TraceVariant {
        article_type: article_type.into(),
        signature: offset_profile.iter().map(|s| s.activity.clone()).collect(),
        frequency,
        exemplars: Vec::new(),
        offset_profile,
    }
}

fn frequency_filter_check() -> Outcome {
    let catalog = VariantCatalog::from_variants([
        variant("T", "c", 10, &[(0, 1.0)]),
        variant("T", "a", 60, &[(0, 1.0)]),
        variant("T", "b", 30, &[(0, 1.0)]),
    ]);
    let all = catalog.variants("T").unwrap();
    let kept: Vec<u64> = frequency_filter(all, 0.8)
        .unwrap()
        .iter()
        .map(|v| v.frequency)
        .collect();
    ensure(kept == [60, 30], || format!("mass 0.8 kept {kept:?}"))?;
    let kept = frequency_filter(all, 1.0).unwrap().len();
    ensure(kept == 3, || format!("mass 1.0 kept {kept}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for case in 0..1000 {
        let n = rng.random_range(1..=20);
        let list: Vec<TraceVariant> = (0..n)
            .map(|i| {
                variant(
                    "T",
                    &format!("v{i}"),
                    rng.random_range(1..=1000),
                    &[(0, 1.0)],
                )
            })
            .collect();
        let catalog = VariantCatalog::from_variants(list);
        let sorted = catalog.variants("T").unwrap();
        // mass = k / 1000, compared in integers
        let k: u64 = rng.random_range(1..=1000);
        let kept = frequency_filter(sorted, k as f64 / 1000.0).unwrap();
        ensure(std::ptr::eq(kept.as_ptr(), sorted.as_ptr()), || {
            "not a prefix".into()
        })?;
        let freqs: Vec<u64> = sorted.iter().map(|v| v.frequency).collect();
        ensure(freqs.windows(2).all(|w| w[0] >= w[1]), || {
            "catalog not sorted".into()
        })?;
        let total: u64 = freqs.iter().sum();
        let reaches = |r: usize| freqs[..r].iter().sum::<u64>() * 1000 >= k * total;
        let r = kept.len();
        ensure(r >= 1 && reaches(r) && !reaches(r - 1), || {
            format!("case {case}: kept {r} of {freqs:?} at mass {k}/1000")
        })?;
    }
    Ok("60/30/10 at 0.8 keeps 2, at 1.0 keeps 3; 1000 random vectors minimal".into())
}

// Replay

fn replay_conservation() -> Outcome {
    let monday = NaiveDate::from_ymd_opt(2023, 5, 8).unwrap();
    let catalog = VariantCatalog::from_variants([
        variant(
            "T",
            "long",
            75,
            &[(0, 1.3), (0, 0.7), (2, 4.1), (5, 0.0), (9, 2.35)],
        ),
        variant("T", "short", 25, &[(0, 0.45), (3, 6.2)]),
    ]);
    let variants = catalog.variants("T").unwrap();
    let activities = sample_new_order_activities(&catalog, "T", 10_000, monday, 42, 1.0).unwrap();

    let mut orders: BTreeMap<usize, (String, Vec<_>)> = BTreeMap::new();
    for a in &activities {
        let Provenance::NewOrder { variant_id, order } = &a.provenance else {
            return Err("new-order activity with running provenance".into());
        };
        orders
            .entry(*order)
            .or_insert_with(|| (variant_id.clone(), Vec::new()))
            .1
            .push(a);
    }
    ensure(orders.len() == 10_000, || {
        format!("{} orders emitted", orders.len())
    })?;
    let mut counts = [0usize; 2];
    for (order, (variant_id, acts)) in &orders {
        let rank = (0..2)
            .find(|r| VariantCatalog::variant_id("T", *r) == *variant_id)
            .ok_or_else(|| format!("unknown variant {variant_id}"))?;
        counts[rank] += 1;
        let profile = &variants[rank].offset_profile;
        let expected: f64 = profile.iter().map(|s| s.mean_duration_hours).sum();
        let emitted: f64 = acts.iter().map(|a| a.planned_duration_hours).sum();
        ensure(emitted == expected, || {
            format!("order {order}: {emitted} hours emitted, profile sums to {expected}")
        })?;
        let nonzero: Vec<&ProfileStep> = profile
            .iter()
            .filter(|s| s.mean_duration_hours != 0.0)
            .collect();
        ensure(acts.len() == nonzero.len(), || {
            format!("order {order}: step count")
        })?;
        for (a, s) in acts.iter().zip(nonzero) {
            ensure(
                a.activity == s.activity && (a.planned_date - monday).num_days() == s.day_offset,
                || format!("order {order}: {} misplaced", a.activity),
            )?;
        }
    }
    let share = counts[0] as f64 / 10_000.0;
    let detail = format!(
        "10000 orders conserved, 75/25 catalog drew {:.2}%",
        100.0 * share
    );
    ensure((share - 0.75).abs() <= 0.02, || detail.clone())?;
    Ok(detail)
}

// End to end

fn run_cli(workdir: &Path, args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_procload"))
        .args(args)
        .env("PROCLOAD_DATA_DIR", workdir.join("data"))
        .env("PROCLOAD_MODEL_DIR", workdir.join("models"))
        .env_remove("PROCLOAD_LOG")
        .env_remove("PROCLOAD_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn date(v: &Value) -> NaiveDate {
    NaiveDate::parse_from_str(v.as_str().unwrap(), "%Y-%m-%d").unwrap()
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic_log.csv");
    let log = log.to_str().unwrap();
    run_cli(
        dir.path(),
        &[
            "--seed", "11", "train", "--log", log, "--epochs", "30", "--hidden", "16",
        ],
    )?;
    let out: Vec<_> = ["run1", "run2"]
        .iter()
        .map(|d| dir.path().join(d))
        .collect();
    for o in &out {
        run_cli(
            dir.path(),
            &[
                "--seed",
                "5",
                "forecast",
                "--log",
                log,
                "--horizon",
                "8",
                "--out",
                o.to_str().unwrap(),
            ],
        )?;
    }
    for f in ["forecast.json", "activities.csv", "aggregate.csv"] {
        let a = std::fs::read(out[0].join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(out[1].join(f)).map_err(|e| e.to_string())?;
        ensure(!a.is_empty() && a == b, || {
            format!("{f} differs between runs")
        })?;
    }

    let doc: Value =
        serde_json::from_slice(&std::fs::read(out[0].join("forecast.json")).unwrap()).unwrap();
    let new = doc["new_order_activities"].as_array().unwrap();
    let running = doc["running_completions"].as_array().unwrap();
    ensure(!new.is_empty() && !running.is_empty(), || {
        format!("{} new and {} running activities", new.len(), running.len())
    })?;
    let start = date(&doc["forecast_start"]);
    ensure(start.weekday() == chrono::Weekday::Mon, || {
        "forecast does not start on a Monday".into()
    })?;
    let week = |d: NaiveDate| {
        let monday = d - Days::days(d.weekday().num_days_from_monday() as i64);
        ((monday - start).num_days() / 7) as usize
    };
    let weeks = new
        .iter()
        .chain(running)
        .map(|a| week(date(&a["planned_date"])) + 1)
        .fold(8, usize::max);
    let aggregate = doc["aggregate"].as_object().unwrap();
    let mut expected: BTreeMap<String, Vec<f64>> = aggregate
        .keys()
        .map(|bu| (bu.clone(), vec![0.0; weeks]))
        .collect();
    for a in new.iter().chain(running) {
        let bu = a["business_unit"].as_str().unwrap();
        let bins = expected
            .get_mut(bu)
            .ok_or_else(|| format!("unit {bu} missing from aggregate"))?;
        bins[week(date(&a["planned_date"]))] += a["planned_duration_hours"].as_f64().unwrap();
    }
    for (bu, series) in aggregate {
        ensure(date(&series["start_date"]) == start, || {
            format!("{bu}: start date")
        })?;
        let got: Vec<f64> = series["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        ensure(got == expected[bu], || {
            format!("{bu}: {got:?} != {:?}", expected[bu])
        })?;
    }
    Ok(format!(
        "3 output files identical; {} units, {} new + {} running activities binned exactly",
        aggregate.len(),
        new.len(),
        running.len()
    ))
}

// Smoothing

fn smoothing() -> Outcome {
    let mut kernels: Vec<(String, Kernel, Vec<f64>)> = Vec::new();
    for w in 1..=30usize {
        let half = w / 2;
        let peak = w.div_ceil(2);
        let raw = (0..=2 * half)
            .map(|k| (peak - k.abs_diff(half)) as f64)
            .collect();
        kernels.push((format!("triangle {w}"), Kernel::triangular(w).unwrap(), raw));
    }
    for span in (1..=15usize).step_by(2) {
        let half = (span - 1) / 2;
        let raw = (0..=2 * half)
            .map(|k| 0.5f64.powi(k.abs_diff(half) as i32))
            .collect();
        kernels.push((
            format!("exponential {span}"),
            Kernel::exponential(span).unwrap(),
            raw,
        ));
    }
    for (name, kernel, raw) in &kernels {
        let half = (raw.len() - 1) / 2;
        for len in 1..=60usize {
            for i in 0..len {
                let weights = kernel.weights_at(i, len);
                let sum: f64 = weights.iter().map(|(_, w)| w).sum();
                ensure((sum - 1.0).abs() <= 1e-12, || {
                    format!("{name}, len {len}, pos {i}: sum {sum}")
                })?;
                let lo = i.saturating_sub(half);
                let hi = (i + half).min(len - 1);
                let total: f64 = (lo..=hi).map(|j| raw[j + half - i]).sum();
                for (j, w) in &weights {
                    let want = raw[j + half - i] / total;
                    ensure((w - want).abs() <= 1e-15, || {
                        format!("{name}: weight at {i}->{j}")
                    })?;
                }
            }
            for c in [0.0, 1.0, 0.1, 3.7e-3, -7.25, 1e9 + 0.3] {
                let smoothed = kernel.apply(&vec![c; len]);
                ensure(smoothed.iter().all(|v| *v == c), || {
                    format!("{name}: constant {c} moved")
                })?;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let start =
            NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + Days::days(rng.random_range(0..400));
        let len = rng.random_range(1..=200);
        // quarter hours, as durations are recorded
        let values: Vec<f64> = (0..len)
            .map(|_| rng.random_range(0..400) as f64 * 0.25)
            .collect();
        let daily = TimeSeries::new(start, Step::Day, values.clone());
        let weekly = resample_weekly(&daily);
        let total: f64 = values.iter().sum();
        let weekly_total: f64 = weekly.values.iter().sum();
        ensure(weekly_total == total, || {
            format!("{weekly_total} != {total}")
        })?;
        ensure(weekly.start_date.weekday() == chrono::Weekday::Mon, || {
            "week start".into()
        })?;
        for (w, v) in weekly.values.iter().enumerate() {
            let from = weekly.start_date + Days::days(7 * w as i64);
            let own: f64 = values
                .iter()
                .enumerate()
                .filter(|(d, _)| {
                    let day = start + Days::days(*d as i64);
                    day >= from && day < from + Days::days(7)
                })
                .map(|(_, v)| v)
                .sum();
            ensure(*v == own, || format!("week {w}: {v} != {own}"))?;
        }
    }
    Ok(format!(
        "{} kernels on lengths 1-60; 500 daily series resampled",
        kernels.len()
    ))
}

// Model artifact

fn artifact_roundtrip(f: &Fitted) -> Outcome {
    let bytes = save_model(&f.model);
    let loaded = load_model(&bytes).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let monday = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
    for n in 0..100 {
        let first = monday + Days::days(7 * rng.random_range(0..300));
        let window: Vec<FeatureRow> = (0..f.model.config.window)
            .map(|i| {
                FeatureRow::new(
                    first + Days::days(7 * i as i64),
                    rng.random_range(0.0..120.0),
                    rng.random_range(0..30) as f64,
                    rng.random_range(0..8) as f64,
                )
            })
            .collect();
        let a = f.model.forward(&window).unwrap();
        let b = loaded.forward(&window).unwrap();
        ensure(a.to_bits() == b.to_bits(), || {
            format!("window {n}: {a} vs {b}")
        })?;
    }
    ensure(
        loaded
            .params
            .tensors()
            .iter()
            .map(|t| t.len())
            .sum::<usize>()
            == f.model.params.len(),
        || "parameter count".into(),
    )?;
    ensure(f.model.params.input_dim == INPUT_DIM, || "input dim".into())?;
    Ok(format!("{} bytes, 100 windows bit-identical", bytes.len()))
}

fn run(name: &str, budget: Option<Duration>, check: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let elapsed = t.elapsed();
    let result = match (result, budget) {
        (Ok(d), Some(b)) if elapsed > b => Err(format!("{d}; over the {}s budget", b.as_secs())),
        (r, _) => r,
    };
    let (tag, detail, ok) = match result {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!("{tag} {name}: {detail} ({:.2}s)", elapsed.as_secs_f64());
    ok
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= run(
        "levenshtein matches naive recursion",
        Some(Duration::from_secs(30)),
        levenshtein_oracle,
    );
    ok &= run(
        "gradient check",
        Some(Duration::from_secs(10)),
        gradient_check,
    );

    let t = Instant::now();
    let fitted = fit_sinusoid();
    let fit_time = t.elapsed();
    ok &= run(
        "synthetic forecasting",
        Some(Duration::from_secs(300).saturating_sub(fit_time)),
        || {
            synthetic_forecasting(&fitted)
                .map(|d| format!("{d}, trained in {:.1}s", fit_time.as_secs_f64()))
        },
    );
    ok &= run("error propagation", None, || error_propagation(&fitted));
    ok &= run("frequency filter", None, frequency_filter_check);
    ok &= run("replay conservation", None, replay_conservation);
    ok &= run("end-to-end determinism and additivity", None, end_to_end);
    ok &= run("smoothing kernels", None, smoothing);
    ok &= run("model artifact round-trip", None, || {
        artifact_roundtrip(&fitted)
    });

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
