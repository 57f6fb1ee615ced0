// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_unlearn"))
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str], config: &Path, out: &str) -> Output {
        bin()
            .args(args)
            .arg("--config")
            .arg(config)
            .arg("--out")
            .arg(self.path(out))
            .output()
            .unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.path(name)).unwrap()).unwrap()
    }
}

fn ok(out: &Output) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

const MEAN_CFG: &str = r#"{
    "loss": {"kind": "mean-squared", "d": 1, "data_radius": 1.0},
    "data": {"path": "train.csv"},
    "budget": {"epsilon": 1.0, "delta": 1e-5, "m_budget": 2, "seed": 3},
    "model": "model.json",
    "deletions": "del.csv"
}"#;

fn mean_workspace() -> (Workspace, PathBuf) {
    let ws = Workspace::new();
    ws.write("train.csv", "x\n0\n1\n1\n0\n1\n");
    ws.write("del.csv", "x\n1\n");
    let cfg = ws.write("cfg.json", MEAN_CFG);
    (ws, cfg)
}

#[test]
fn train_on_five_rows_gives_sample_mean() {
    let (ws, cfg) = mean_workspace();
    let out = ws.run(&["train"], &cfg, "model.json");
    ok(&out);
    let model = ws.json("model.json");
    assert_eq!(model["w_hat"][0].as_f64(), Some(0.6));
    assert_eq!(model["n"].as_u64(), Some(5));
    assert_eq!(model["format_version"].as_u64(), Some(1));
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("n=5") && summary.contains("d=1"), "{summary}");
}

#[test]
fn synthetic_training_is_byte_identical() {
    let ws = Workspace::new();
    let cfg = ws.write(
        "cfg.json",
        r#"{
            "loss": {"kind": "mean-squared", "d": 1, "data_radius": 1.0},
            "data": {"synthetic": {"distribution": {"kind": "bernoulli", "p": 0.5}, "n": 1000, "seed": 7}}
        }"#,
    );
    ok(&ws.run(&["train"], &cfg, "a.json"));
    ok(&ws.run(&["train"], &cfg, "b.json"));
    let a = std::fs::read(ws.path("a.json")).unwrap();
    assert_eq!(a, std::fs::read(ws.path("b.json")).unwrap());
    // --seed changes the sample
    let out = bin()
        .args(["train", "--seed", "8", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(ws.path("c.json"))
        .output()
        .unwrap();
    ok(&out);
    assert_ne!(a, std::fs::read(ws.path("c.json")).unwrap());
}

#[test]
fn malformed_csv_is_an_input_error() {
    let (ws, cfg) = mean_workspace();
    ws.write("train.csv", "x\n0\n1,2\n");
    let out = ws.run(&["train"], &cfg, "model.json");
    assert_eq!(out.status.code(), Some(3));
    ws.write("train.csv", "x\n0\noops\n");
    assert_eq!(ws.run(&["train"], &cfg, "model.json").status.code(), Some(3));
}

#[test]
fn config_errors_have_their_own_code() {
    let ws = Workspace::new();
    let cfg = ws.write("cfg.json", r#"{"loss": {"kind": "mean-squared", "d": 1, "data_radius": 1.0}, "extra": 1}"#);
    assert_eq!(ws.run(&["train"], &cfg, "m.json").status.code(), Some(2));
    let missing = ws.path("nope.json");
    assert_eq!(ws.run(&["train"], &missing, "m.json").status.code(), Some(2));
    let no_data = ws.write("c2.json", r#"{"loss": {"kind": "mean-squared", "d": 1, "data_radius": 1.0}}"#);
    assert_eq!(ws.run(&["train"], &no_data, "m.json").status.code(), Some(2));
}

#[test]
fn quadratic_unlearn_matches_retrain() {
    let (ws, cfg) = mean_workspace();
    ok(&ws.run(&["train"], &cfg, "model.json"));
    ok(&ws.run(&["unlearn"], &cfg, "u.json"));
    ok(&ws.run(&["retrain"], &cfg, "r.json"));
    let u = ws.json("u.json");
    let r = ws.json("r.json");
    assert_eq!(u["sigma"].as_f64(), Some(0.0));
    assert_eq!(u["m_used"].as_u64(), Some(1));
    assert_eq!(u["seed"].as_u64(), Some(3));
    assert!(u.get("w_bar").is_none());
    let (wt, wr) = (u["w_tilde"][0].as_f64().unwrap(), r["w_hat"][0].as_f64().unwrap());
    assert!((wt - 0.5).abs() < 1e-12 && (wr - 0.5).abs() < 1e-12);

    ok(&ws.run(&["unlearn", "--audit"], &cfg, "u2.json"));
    assert!(ws.json("u2.json")["w_bar"].is_array());
}

#[test]
fn deletions_over_budget_exit_with_budget_code() {
    let (ws, cfg) = mean_workspace();
    ok(&ws.run(&["train"], &cfg, "model.json"));
    ws.write("del.csv", "x\n1\n1\n0\n");
    let out = ws.run(&["unlearn"], &cfg, "u.json");
    assert_eq!(out.status.code(), Some(5));
    assert!(!ws.path("u.json").exists());
}

#[test]
fn model_for_another_loss_is_rejected() {
    let (ws, cfg) = mean_workspace();
    ok(&ws.run(&["train"], &cfg, "model.json"));
    let other = ws.write("other.json", &MEAN_CFG.replace("\"data_radius\": 1.0", "\"data_radius\": 2.0"));
    assert_eq!(ws.run(&["unlearn"], &other, "u.json").status.code(), Some(3));
}

fn logistic_workspace() -> (Workspace, PathBuf) {
    let ws = Workspace::new();
    let cfg = ws.write(
        "cfg.json",
        r#"{
            "loss": {"kind": "regularized-logistic", "d": 3, "lambda": 0.05, "data_radius": 1.0},
            "data": {"synthetic": {"distribution": {"kind": "gaussian-logistic", "d": 3, "margin": 2.0}, "n": 400, "seed": 11}},
            "budget": {"epsilon": 0.5, "delta": 1e-4, "m_budget": 5, "seed": 21},
            "model": "model.json",
            "deletions": "del.csv"
        }"#,
    );
    ws.write("del.csv", "x1,x2,x3,y\n");
    (ws, cfg)
}

#[test]
fn empty_deletion_still_adds_noise() {
    let (ws, cfg) = logistic_workspace();
    ok(&ws.run(&["train"], &cfg, "model.json"));
    ok(&ws.run(&["unlearn", "--audit"], &cfg, "u.json"));
    let model = ws.json("model.json");
    let u = ws.json("u.json");
    let sigma = u["sigma"].as_f64().unwrap();
    assert!(sigma > 0.0);
    assert_eq!(u["m_used"].as_u64(), Some(0));
    assert_eq!(u["w_bar"], model["w_hat"]);
    assert_ne!(u["w_tilde"], model["w_hat"]);
}

#[test]
fn audit_report_on_quadratic_passes() {
    let (ws, cfg) = mean_workspace();
    ok(&ws.run(&["audit"], &cfg, "audit.json"));
    let report = ws.json("audit.json");
    assert_eq!(report["all_pass"], Value::Bool(true));
    let checks = report["checks"].as_array().unwrap();
    for c in checks {
        assert!(c["name"].is_string() && c["measured"].is_number() && c["bound"].is_number());
        assert!(c["slack"].is_number() && c["pass"] == Value::Bool(true));
    }
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["sensitivity", "drift", "privacy", "noise_calibration"]);
}

#[test]
fn audit_on_convex_loss_reports_norm_bound() {
    let ws = Workspace::new();
    let cfg = ws.write(
        "cfg.json",
        r#"{
            "loss": {"kind": "regularized-logistic", "d": 2, "data_radius": 1.0, "B": 3.0},
            "data": {"synthetic": {"distribution": {"kind": "gaussian-logistic", "d": 2, "margin": 1.0}, "n": 300, "seed": 2}},
            "budget": {"epsilon": 1.0, "delta": 1e-3, "m_budget": 10, "seed": 4},
            "deletions": "del.csv"
        }"#,
    );
    ws.write("del.csv", "x1,x2,y\n");
    ok(&ws.run(&["audit"], &cfg, "audit.json"));
    let report = ws.json("audit.json");
    assert_eq!(report["all_pass"], Value::Bool(true), "{report}");
    assert_eq!(report["checks"][4]["name"], "norm_bound");
}

#[test]
fn capacity_ratio_doubles_with_sixteenfold_dimension() {
    let ws = Workspace::new();
    let cfg = ws.write(
        "cfg.json",
        r#"{"capacity": {"d": [16, 256], "n": [10000], "epsilon": [1.0], "delta": [0.001]}}"#,
    );
    ok(&ws.run(&["capacity"], &cfg, "cap.csv"));
    let text = std::fs::read_to_string(ws.path("cap.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,n,epsilon,delta,m_unlearn,m_dp,ratio"));
    let ratio: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ratio.len(), 2);
    assert_eq!(ratio[1] / ratio[0], 2.0);
}

#[test]
fn demo_reports_both_arms() {
    let ws = Workspace::new();
    let cfg = ws.write("cfg.json", r#"{"demo": {"n": 1000, "m": 200, "trials": 20, "seed": 0}}"#);
    ok(&ws.run(&["demo-population-risk"], &cfg, "demo.csv"));
    let text = std::fs::read_to_string(ws.path("demo.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "arm,n,m,mean_estimate,excess_risk,std_error");
    let adv: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&adv[..3], ["adversarial", "1000", "200"]);
    let risk: f64 = adv[4].parse().unwrap();
    assert!((risk - 0.015625).abs() < 0.005, "{risk}");
    assert!(lines[2].starts_with("random,1000,200,"));
}

#[test]
fn experiment_writes_one_row_per_cell() {
    let ws = Workspace::new();
    let cfg = ws.write(
        "cfg.json",
        r#"{
            "loss": {"kind": "regularized-logistic", "d": 2, "lambda": 0.1, "data_radius": 1.0},
            "experiment": {
                "distribution": {"kind": "gaussian-logistic", "d": 2, "margin": 2.0},
                "d": [2], "n": [100, 200], "m": [1, 5], "epsilon": [1.0], "delta": [1e-4],
                "trials": 1, "seed": 9, "test_samples": 500
            }
        }"#,
    );
    ok(&ws.run(&["experiment"], &cfg, "exp.csv"));
    let text = std::fs::read_to_string(ws.path("exp.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "d,n,m,epsilon,delta,seed,excess_learn,excess_unlearn,excess_retrain,gamma,sigma,sensitivity_measured,sensitivity_bound"
    );
    assert_eq!(lines.len(), 5);
}
