//! `procload` subcommands. Each one prints a JSON document to stdout.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use procload_core::eventlog::{
    build_process_graph, export_graph, validate_log, write_log, EventLog, ValidationConfig,
};
use procload_core::forecast::train;
use procload_core::pipeline::{evaluate, prepare_features, run_pipeline, ForecastRequest};
use procload_core::replay::write_planned_csv;
use procload_core::synth::{generate_synthetic_log, SyntheticLogSpec};
use procload_core::workload::{
    centered_exp_smooth, demand_series, supply_series, triangular_smooth, Step,
};
use serde_json::{json, Value};

use crate::{read_log, AppConfig, AppError, FileStore};

#[derive(Debug, Parser)]
#[command(
    name = "procload",
    version,
    about = "Workload reconstruction and forecasting from event logs"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for training, sampling and synthesis; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct LogArg {
    /// Event log CSV; defaults to the configured log or `<data_dir>/log.csv`.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Demand,
    Supply,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StepArg {
    Day,
    Week,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a log and store it as the default log.
    Ingest {
        #[arg(long)]
        log: PathBuf,
        /// Destination; defaults to `<data_dir>/log.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report structural problems in a log.
    Validate {
        #[command(flatten)]
        log: LogArg,
        #[arg(long, default_value_t = 365)]
        min_period_days: i64,
        #[arg(long, default_value_t = 10)]
        min_traces: usize,
        /// Exit with an error when any issue is found.
        #[arg(long)]
        strict: bool,
    },
    /// Write a demand or supply series as CSV, optionally with a process graph.
    Reconstruct {
        #[command(flatten)]
        log: LogArg,
        #[arg(long)]
        article_type: String,
        #[arg(long, value_enum, default_value = "supply")]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "week")]
        step: StepArg,
        #[arg(long)]
        unit: Option<String>,
        /// Triangular smoothing window, applied at the chosen step.
        #[arg(long)]
        triangle: Option<usize>,
        /// Centered exponential smoothing span, applied at the chosen step.
        #[arg(long)]
        exp_span: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the process graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        graph_threshold: f64,
    },
    /// Train one model per article type and store them.
    Train {
        #[command(flatten)]
        log: LogArg,
        /// Repeatable; all types when omitted.
        #[arg(long = "article-type")]
        article_types: Vec<String>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Forecast workload with the stored models.
    Forecast {
        #[command(flatten)]
        log: LogArg,
        /// Defaults to the last day of the log.
        #[arg(long)]
        as_of: Option<NaiveDate>,
        #[arg(long, default_value_t = 4)]
        horizon: usize,
        #[arg(long = "article-type")]
        article_types: Vec<String>,
        /// Directory for forecast.json, activities.csv and aggregate.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and score models on each type's chronological test split.
    Evaluate {
        #[command(flatten)]
        log: LogArg,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long = "article-type")]
        article_types: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        log: LogArg,
        #[arg(long)]
        bind: Option<String>,
    },
    /// Generate a synthetic event log.
    Synth {
        /// TOML generator spec; the built-in three-type spec when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        weeks: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn log_path(cfg: &AppConfig, arg: &LogArg) -> PathBuf {
    arg.log
        .clone()
        .or_else(|| cfg.log_path.clone())
        .unwrap_or_else(|| cfg.data_dir.join("log.csv"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn summary(log: &EventLog) -> Value {
    let (first, last) = log.period();
    json!({
        "cases": log.traces().len(),
        "events": log.event_count(),
        "article_types": log.article_types(),
        "business_units": log.business_units(),
        "period": [first, last],
        "rejected_rows": log.validation_report().len(),
    })
}

fn aggregate_csv(
    forecast: &procload_core::pipeline::WorkloadForecast,
) -> Result<Vec<u8>, AppError> {
    let mut out = String::from("business_unit,week_start,hours\n");
    for (unit, series) in &forecast.aggregate {
        for (d, v) in series.dates().zip(&series.values) {
            out.push_str(&format!("{unit},{d},{v}\n"));
        }
    }
    Ok(out.into_bytes())
}

/// Runs `cli` and returns the document to print.
pub fn run(cli: Cli) -> Result<Value, AppError> {
    let mut cfg = AppConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.train.seed = s;
    }
    match cli.command {
        Command::Ingest { log, out } => {
            let parsed = read_log(&log, &cfg.schema)?;
            let out = out.unwrap_or_else(|| cfg.data_dir.join("log.csv"));
            let mut bytes = Vec::new();
            write_log(&parsed, &mut bytes)?;
            write_file(&out, &bytes)?;
            let mut s = summary(&parsed);
            s["written"] = json!(out);
            Ok(s)
        }
        Command::Validate {
            log,
            min_period_days,
            min_traces,
            strict,
        } => {
            let log = read_log(&log_path(&cfg, &log), &cfg.schema)?;
            let issues = validate_log(
                &log,
                &ValidationConfig {
                    min_period_days,
                    min_traces_per_type: min_traces,
                },
            );
            if strict && !issues.is_empty() {
                return Err(AppError::BadRequest(format!(
                    "{} validation issues: {}",
                    issues.len(),
                    serde_json::to_string(&issues)?
                )));
            }
            Ok(json!({ "issues": issues }))
        }
        Command::Reconstruct {
            log,
            article_type,
            kind,
            step,
            unit,
            triangle,
            exp_span,
            out,
            dot,
            graph_threshold,
        } => {
            let log = read_log(&log_path(&cfg, &log), &cfg.schema)?;
            let step = match step {
                StepArg::Day => Step::Day,
                StepArg::Week => Step::Week,
            };
            let mut series = match kind {
                KindArg::Demand => demand_series(&log, &article_type, step)?,
                KindArg::Supply => supply_series(&log, &article_type, unit.as_deref(), step)?,
            };
            if let Some(w) = triangle {
                series.series = triangular_smooth(&series.series, w)?;
            }
            if let Some(s) = exp_span {
                series.series = centered_exp_smooth(&series.series, s)?;
            }
            let mut bytes = Vec::new();
            series
                .series
                .write_csv(&mut bytes)
                .map_err(procload_core::eventlog::EventLogError::from)?;
            write_file(&out, &bytes)?;
            let mut doc = json!({ "series": out, "points": series.series.len(), "total": series.series.total() });
            if let Some(dot) = dot {
                let graph = build_process_graph(&log, graph_threshold)?;
                write_file(&dot, export_graph(&graph).as_bytes())?;
                doc["graph"] =
                    json!({ "dot": dot, "nodes": graph.nodes.len(), "edges": graph.edges.len() });
            }
            Ok(doc)
        }
        Command::Train {
            log,
            article_types,
            epochs,
            hidden,
            window,
        } => {
            let log = read_log(&log_path(&cfg, &log), &cfg.schema)?;
            let mut tc = cfg.train.clone();
            tc.epochs = epochs.unwrap_or(tc.epochs);
            tc.hidden_dim = hidden.unwrap_or(tc.hidden_dim);
            tc.window = window.unwrap_or(tc.window);
            cfg.ensure_dirs()?;
            let store = FileStore::new(&cfg.model_dir, cfg.forecast_dir());
            let types = if article_types.is_empty() {
                log.article_types()
            } else {
                article_types
            };
            let mut reports = BTreeMap::new();
            for t in types {
                let rows = prepare_features(&log, &t, &cfg.pipeline.prep)?;
                let model = train(&t, &rows, &tc)?;
                let path = store.save_model(&model)?;
                let r = &model.train_report;
                reports.insert(
                    t,
                    json!({
                        "model": path,
                        "final_loss": r.epoch_losses.last(),
                        "test_rmse": r.test_rmse,
                        "test_mape": r.test_mape,
                    }),
                );
            }
            Ok(json!({ "trained": reports }))
        }
        Command::Forecast {
            log,
            as_of,
            horizon,
            article_types,
            out,
        } => {
            let log = read_log(&log_path(&cfg, &log), &cfg.schema)?;
            let store = FileStore::new(&cfg.model_dir, cfg.forecast_dir());
            let request = ForecastRequest {
                as_of: as_of.unwrap_or_else(|| log.period().1.date()),
                horizon_weeks: horizon,
                article_types,
                seed: cfg.seed,
            };
            let types = if request.article_types.is_empty() {
                log.article_types()
            } else {
                request.article_types.clone()
            };
            let mut models = BTreeMap::new();
            for t in types {
                if let Some(m) = store.load_model(&t)? {
                    models.insert(t, m);
                }
            }
            let forecast = run_pipeline(&log, &request, &models, &cfg.pipeline)?;
            let id = store.save_forecast(&forecast)?;
            let activities: Vec<_> = forecast.activities().cloned().collect();
            let mut csv = Vec::new();
            write_planned_csv(&activities, &mut csv)
                .map_err(procload_core::eventlog::EventLogError::from)?;
            write_file(
                &out.join("forecast.json"),
                &serde_json::to_vec_pretty(&forecast)?,
            )?;
            write_file(&out.join("activities.csv"), &csv)?;
            write_file(&out.join("aggregate.csv"), &aggregate_csv(&forecast)?)?;
            Ok(json!({
                "id": id,
                "out": out,
                "new_order_activities": forecast.new_order_activities.len(),
                "running_completions": forecast.running_completions.len(),
            }))
        }
        Command::Evaluate {
            log,
            horizon,
            article_types,
            out,
        } => {
            let log = read_log(&log_path(&cfg, &log), &cfg.schema)?;
            let mut ec = cfg.eval_config();
            ec.horizon_weeks = horizon.unwrap_or(ec.horizon_weeks);
            ec.article_types = article_types;
            let report = evaluate(&log, &ec)?;
            let doc = serde_json::to_value(&report)?;
            if let Some(out) = out {
                write_file(&out, &serde_json::to_vec_pretty(&report)?)?;
            }
            Ok(doc)
        }
        Command::Serve { log, bind } => {
            let path = log_path(&cfg, &log);
            let log = read_log(&path, &cfg.schema)?;
            cfg.bind = bind.unwrap_or(cfg.bind);
            cfg.ensure_dirs()?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::api::serve(cfg, log))?;
            Ok(json!({ "stopped": true }))
        }
        Command::Synth { spec, weeks, out } => {
            let mut spec = match spec {
                Some(p) => {
                    let text = fs::read_to_string(&p)
                        .map_err(|e| AppError::Config(format!("{}: {e}", p.display())))?;
                    toml::from_str(&text)
                        .map_err(|e| AppError::Config(format!("{}: {e}", p.display())))?
                }
                None => SyntheticLogSpec::default(),
            };
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            spec.weeks = weeks.unwrap_or(spec.weeks);
            let synth =
                generate_synthetic_log(&spec).map_err(|e| AppError::BadRequest(e.to_string()))?;
            let mut bytes = Vec::new();
            write_log(&synth.log, &mut bytes)?;
            write_file(&out, &bytes)?;
            let mut s = summary(&synth.log);
            s["written"] = json!(out);
            Ok(s)
        }
    }
}
