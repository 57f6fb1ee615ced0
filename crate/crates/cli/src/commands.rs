// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! One function per subcommand. Each returns the bytes of its output file
//! and a one-line human summary; `run` decides where both go.

use newton_unlearn::audit::{self, privacy_audit, BoundCheck, DeletionAudit};
use newton_unlearn::capacity::{capacity_report, CapacityInputs};
use newton_unlearn::experiment::ExperimentGrid;
use newton_unlearn::solver::empirical_gradient;
use newton_unlearn::unlearn::{convex_surrogate, learn_sc, unlearn_sc};
use newton_unlearn::{Dataset, DeleteRequest, LossModel, LossSpec, TrainedModel};
use serde::Serialize;

use crate::config::{DataSource, RunConfig};
use crate::error::CliError;
use crate::io::{csv_bytes, json_bytes, read_instances};

pub struct Output {
    pub bytes: Vec<u8>,
    pub summary: String,
}

fn load_data(cfg: &RunConfig, loss: &LossModel) -> Result<Dataset, CliError> {
    let data = match cfg.data()? {
        DataSource::Path(p) => Dataset::new(read_instances(p, loss)?)
            .map_err(|_| CliError::Input(format!("{}: no data rows", p.display())))?,
        DataSource::Synthetic(s) => s.distribution.sample_n(s.n, s.seed)?,
    };
    data.validate_for(loss)?;
    Ok(data)
}

fn load_deletions(cfg: &RunConfig, loss: &LossModel) -> Result<DeleteRequest, CliError> {
    Ok(DeleteRequest::new(read_instances(cfg.deletions_path()?, loss)?))
}

/// The loss actually minimized: the base loss when it is strongly convex,
/// otherwise its regularized surrogate for a training set of size `n`.
fn solved_loss(cfg: &RunConfig, base: &LossModel, n: usize) -> Result<LossModel, CliError> {
    if base.strong_convexity() > 0.0 {
        Ok(base.clone())
    } else {
        let budget = cfg.budget.ok_or_else(|| {
            CliError::Config("a loss with lambda = 0 needs a `budget` to select its regularization".into())
        })?;
        Ok(convex_surrogate(base, n, &budget)?)
    }
}

pub fn train(cfg: &RunConfig) -> Result<Output, CliError> {
    let base = cfg.loss()?;
    let data = load_data(cfg, &base)?;
    let loss = solved_loss(cfg, &base, data.len())?;
    let model = learn_sc(&loss, &data)?;
    let grad = empirical_gradient(&loss, &data, &model.w_hat)?.norm();
    Ok(Output {
        bytes: model_bytes(&model),
        summary: format!(
            "n={} d={} lambda={} grad_norm={:e} tol={:e} w_norm={}",
            model.n,
            loss.dimension(),
            loss.strong_convexity(),
            grad,
            model.solve_tol,
            model.w_hat.norm()
        ),
    })
}

fn model_bytes(model: &TrainedModel) -> Vec<u8> {
    let mut s = model.to_json();
    s.push('\n');
    s.into_bytes()
}

#[derive(Serialize)]
struct UnlearnFile {
    w_tilde: Vec<f64>,
    gamma: f64,
    sigma: f64,
    m_used: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    w_bar: Option<Vec<f64>>,
}

pub fn unlearn(cfg: &RunConfig, include_w_bar: bool) -> Result<Output, CliError> {
    let base = cfg.loss()?;
    let budget = cfg.budget()?;
    let path = cfg.model_path()?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let model = TrainedModel::from_json(&text)?;
    let u = load_deletions(cfg, &base)?;
    let loss = solved_loss(cfg, &base, model.n)?;
    let out = unlearn_sc(&model, &loss, &u, &budget)?;
    let file = UnlearnFile {
        w_tilde: out.w_tilde.iter().copied().collect(),
        gamma: out.gamma,
        sigma: out.sigma,
        m_used: out.m_used,
        seed: budget.seed,
        w_bar: include_w_bar.then(|| out.w_bar.iter().copied().collect()),
    };
    Ok(Output {
        bytes: json_bytes(&file),
        summary: format!("m={} gamma={} sigma={}", out.m_used, out.gamma, out.sigma),
    })
}

pub fn retrain(cfg: &RunConfig) -> Result<Output, CliError> {
    let base = cfg.loss()?;
    let data = load_data(cfg, &base)?;
    let u = load_deletions(cfg, &base)?;
    // same regularization as the model being compared against
    let loss = solved_loss(cfg, &base, data.len())?;
    let model = audit::retrain_oracle(&loss, &data, &u)?;
    Ok(Output {
        bytes: model_bytes(&model),
        summary: format!("n={} m={} w_norm={}", model.n, u.m(), model.w_hat.norm()),
    })
}

#[derive(Serialize)]
struct CheckRow {
    name: &'static str,
    measured: f64,
    bound: f64,
    slack: f64,
    pass: bool,
}

impl CheckRow {
    fn new(name: &'static str, c: BoundCheck) -> Self {
        CheckRow {
            name,
            measured: c.measured,
            bound: c.bound,
            slack: c.slack,
            pass: c.pass,
        }
    }
}

#[derive(Serialize)]
struct AuditReport {
    n: usize,
    m: usize,
    m_budget: usize,
    lambda: f64,
    gamma: f64,
    sigma: f64,
    all_pass: bool,
    checks: Vec<CheckRow>,
}

pub fn audit(cfg: &RunConfig) -> Result<Output, CliError> {
    let base = cfg.loss()?;
    let budget = cfg.budget()?;
    let data = load_data(cfg, &base)?;
    let u = load_deletions(cfg, &base)?;
    let loss = solved_loss(cfg, &base, data.len())?;

    let run = DeletionAudit::run(&loss, &data, &u)?;
    let out = unlearn_sc(&run.model, &loss, &u, &budget)?;
    let sensitivity = run.sensitivity(&loss);
    // solver error is covered by the slack above; the noise has to cover the rest
    let gap = (sensitivity.measured - sensitivity.slack).max(0.0);
    let calibration = if out.gamma > 0.0 {
        let mult = budget.gaussian_multiplier();
        ((out.sigma * budget.epsilon / out.gamma - mult) / mult).abs()
    } else {
        0.0
    };

    let mut checks = vec![
        CheckRow::new("sensitivity", sensitivity),
        CheckRow::new("drift", run.drift(&loss)),
        CheckRow::new("privacy", privacy_audit(gap, &budget, out.sigma)),
        CheckRow::new("noise_calibration", BoundCheck::new(calibration, 1e-12, 0.0)),
    ];
    if base.strong_convexity() == 0.0 {
        let radius = base.lipschitz() / loss.strong_convexity();
        checks.push(CheckRow::new(
            "norm_bound",
            BoundCheck::new(run.model.w_hat.norm(), radius, 1e-6),
        ));
    }
    let all_pass = checks.iter().all(|c| c.pass);
    let report = AuditReport {
        n: data.len(),
        m: u.m(),
        m_budget: budget.m_budget,
        lambda: loss.strong_convexity(),
        gamma: out.gamma,
        sigma: out.sigma,
        all_pass,
        checks,
    };
    Ok(Output {
        bytes: json_bytes(&report),
        summary: format!(
            "{} checks, all_pass={all_pass}",
            report.checks.len()
        ),
    })
}

#[derive(Serialize)]
struct CapacityRow {
    d: usize,
    n: usize,
    epsilon: f64,
    delta: f64,
    m_unlearn: f64,
    m_dp: f64,
    ratio: f64,
}

pub fn capacity(cfg: &RunConfig) -> Result<Output, CliError> {
    let sec = cfg
        .capacity
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `capacity` section".into()))?;
    let mut rows = Vec::new();
    for &d in &sec.d {
        for &n in &sec.n {
            for &epsilon in &sec.epsilon {
                for &delta in &sec.delta {
                    let r = capacity_report(CapacityInputs {
                        d,
                        n,
                        epsilon,
                        delta,
                        c_unlearn: sec.c_unlearn,
                        c_dp: sec.c_dp,
                    })
                    .map_err(|e| CliError::Config(e.to_string()))?;
                    rows.push(CapacityRow {
                        d,
                        n,
                        epsilon,
                        delta,
                        m_unlearn: r.m_unlearn,
                        m_dp: r.m_dp,
                        ratio: r.ratio,
                    });
                }
            }
        }
    }
    Ok(Output {
        summary: format!("{} sweep points", rows.len()),
        bytes: csv_bytes(&rows)?,
    })
}

#[derive(Serialize)]
struct DemoRow {
    arm: &'static str,
    n: usize,
    m: usize,
    mean_estimate: f64,
    excess_risk: f64,
    std_error: f64,
}

pub fn demo(cfg: &RunConfig) -> Result<Output, CliError> {
    let sec = cfg.demo.unwrap_or_default();
    let summary = audit::population_risk_summary(sec.n, sec.m, sec.trials, sec.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let rows: Vec<DemoRow> = summary
        .iter()
        .map(|s| DemoRow {
            arm: s.arm.name(),
            n: s.n,
            m: s.m,
            mean_estimate: s.mean_estimate,
            excess_risk: s.excess_risk,
            std_error: s.std_error,
        })
        .collect();
    let text = summary
        .iter()
        .map(|s| format!("{}: risk={} above_0.01={}", s.arm.name(), s.excess_risk, s.above_threshold))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(Output {
        bytes: csv_bytes(&rows)?,
        summary: text,
    })
}

pub fn experiment(cfg: &RunConfig) -> Result<Output, CliError> {
    let sec = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `experiment` section".into()))?;
    let loss: LossSpec = cfg.loss_spec()?.clone();
    let grid = ExperimentGrid {
        loss,
        distribution: sec.distribution,
        d: sec.d.clone(),
        n: sec.n.clone(),
        m: sec.m.clone(),
        epsilon: sec.epsilon.clone(),
        delta: sec.delta.clone(),
        trials: sec.trials,
        seed: sec.seed,
        test_samples: sec.test_samples,
    };
    grid.cells().map_err(|e| CliError::Config(e.to_string()))?;
    let rows = grid.run()?;
    Ok(Output {
        summary: format!("{} cells", rows.len()),
        bytes: csv_bytes(&rows)?,
    })
}

