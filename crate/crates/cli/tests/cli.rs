use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic_log.csv")
}

struct Workdir {
    dir: tempfile::TempDir,
}

impl Workdir {
    fn new() -> Self {
        Workdir {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, p: &str) -> PathBuf {
        self.dir.path().join(p)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_procload"))
            .args(args)
            .env("PROCLOAD_DATA_DIR", self.path("data"))
            .env("PROCLOAD_MODEL_DIR", self.path("models"))
            .env_remove("PROCLOAD_LOG")
            .env_remove("PROCLOAD_SEED")
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> Value {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        serde_json::from_slice(&out.stdout).unwrap()
    }

    fn fails(&self, args: &[&str]) -> Value {
        let out = self.run(args);
        assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
        let line = String::from_utf8_lossy(&out.stderr);
        serde_json::from_str(line.lines().last().unwrap()).unwrap()
    }
}

fn log_arg() -> String {
    fixture().to_string_lossy().into_owned()
}

#[test]
fn validate_bundled_log() {
    let w = Workdir::new();
    assert_eq!(
        w.ok(&["validate", "--log", &log_arg()]),
        json!({ "issues": [] })
    );
    assert_eq!(
        w.ok(&["validate", "--strict", "--log", &log_arg()]),
        json!({ "issues": [] })
    );
}

#[test]
fn strict_validation_fails_on_issues() {
    let w = Workdir::new();
    let err = w.fails(&[
        "validate",
        "--strict",
        "--min-period-days",
        "5000",
        "--log",
        &log_arg(),
    ]);
    assert_eq!(err["error"], "bad_request");
    assert!(err["message"]
        .as_str()
        .unwrap()
        .contains("period_too_short"));
}

#[test]
fn missing_inputs_and_bad_flags() {
    let w = Workdir::new();
    let err = w.fails(&["validate", "--log", "/nonexistent/log.csv"]);
    assert_eq!(err["error"], "config");
    let out = w.run(&["validate", "--no-such-flag"]);
    assert!(!out.status.success());
}

#[test]
fn ingest_then_default_log() {
    let w = Workdir::new();
    let s = w.ok(&["ingest", "--log", &log_arg()]);
    assert_eq!(s["article_types"], json!(["gearbox", "pump", "valve"]));
    assert!(w.path("data/log.csv").exists());
    assert_eq!(w.ok(&["validate"]), json!({ "issues": [] }));
}

#[test]
fn synth_is_seeded() {
    let w = Workdir::new();
    let a = w.path("a.csv");
    let b = w.path("b.csv");
    let c = w.path("c.csv");
    w.ok(&[
        "--seed",
        "3",
        "synth",
        "--weeks",
        "60",
        "--out",
        a.to_str().unwrap(),
    ]);
    w.ok(&[
        "--seed",
        "3",
        "synth",
        "--weeks",
        "60",
        "--out",
        b.to_str().unwrap(),
    ]);
    w.ok(&[
        "--seed",
        "4",
        "synth",
        "--weeks",
        "60",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn bundled_spec_reproduces_bundled_log() {
    let w = Workdir::new();
    let out = w.path("log.csv");
    let spec = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic_spec.toml");
    w.ok(&[
        "synth",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read(out).unwrap(),
        std::fs::read(fixture()).unwrap()
    );
}

#[test]
fn reconstruct_series_and_graph() {
    let w = Workdir::new();
    let csv = w.path("pump.csv");
    let dot = w.path("graph.dot");
    let doc = w.ok(&[
        "reconstruct",
        "--log",
        &log_arg(),
        "--article-type",
        "pump",
        "--kind",
        "supply",
        "--exp-span",
        "3",
        "--out",
        csv.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
        "--graph-threshold",
        "0.9",
    ]);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("date,value\n"));
    assert_eq!(
        text.lines().count() as u64,
        doc["points"].as_u64().unwrap() + 1
    );
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("digraph"));
}

#[test]
fn forecast_twice_is_identical() {
    let w = Workdir::new();
    w.ok(&[
        "--seed",
        "1",
        "train",
        "--log",
        &log_arg(),
        "--epochs",
        "3",
        "--hidden",
        "4",
    ]);
    for dir in ["f1", "f2"] {
        let out = w.path(dir);
        w.ok(&[
            "--seed",
            "7",
            "forecast",
            "--log",
            &log_arg(),
            "--horizon",
            "4",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    for f in ["forecast.json", "activities.csv", "aggregate.csv"] {
        let a = std::fs::read(w.path("f1").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, std::fs::read(w.path("f2").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn forecast_without_models_names_the_type() {
    let w = Workdir::new();
    let out = w.path("f");
    let err = w.fails(&[
        "forecast",
        "--log",
        &log_arg(),
        "--article-type",
        "pump",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(err["error"], "not_found");
    assert!(err["message"].as_str().unwrap().contains("pump"));
}

#[test]
fn evaluate_report_has_per_type_mape() {
    let w = Workdir::new();
    let cfg = w.path("procload.toml");
    std::fs::write(&cfg, "[train]\nepochs = 2\nhidden_dim = 4\n").unwrap();
    let report = w.path("eval.json");
    w.ok(&[
        "--config",
        cfg.to_str().unwrap(),
        "evaluate",
        "--log",
        &log_arg(),
        "--out",
        report.to_str().unwrap(),
    ]);
    let doc: Value = serde_json::from_slice(&std::fs::read(report).unwrap()).unwrap();
    let per_type = doc["per_type"].as_array().unwrap();
    assert_eq!(per_type.len(), 3);
    for t in per_type {
        assert!(t["one_step_mape"].is_number());
        assert!(t["horizon_mape"].is_number());
    }
}
