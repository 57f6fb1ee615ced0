// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Grid sweeps comparing the learned, unlearned and retrained models.

use serde::{Deserialize, Serialize};

use crate::audit::{analytic_excess_risk, retrain_oracle, sensitivity_bound};
use crate::data::Dataset;
use crate::distribution::Distribution;
use crate::error::{invalid, Result};
use crate::exec::{map_indexed, Execution};
use crate::losses::{LossKind, LossModel, LossSpec, Vector};
use crate::solver::empirical_loss;
use crate::unlearn::{convex_surrogate, learn_sc, unlearn_sc, DeleteRequest, PrivacyBudget};

/// Offset separating the evaluation-sample seed from the training seed.
const TEST_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    /// Loss template; `dimension` is replaced by each grid value of `d`.
    pub loss: LossSpec,
    /// Data template; for gaussian-logistic its `d` follows the grid.
    pub distribution: Distribution,
    pub d: Vec<usize>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_test_samples")]
    pub test_samples: usize,
}

fn default_trials() -> usize {
    1
}

fn default_test_samples() -> usize {
    20_000
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentCell {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub excess_learn: f64,
    pub excess_unlearn: f64,
    pub excess_retrain: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub sensitivity_measured: f64,
    pub sensitivity_bound: f64,
}

impl ExperimentGrid {
    pub fn cells(&self) -> Result<Vec<ExperimentCell>> {
        if self.trials == 0 || self.test_samples < 2 {
            return Err(invalid("experiment needs trials >= 1 and test_samples >= 2"));
        }
        let mut cells = Vec::new();
        for &d in &self.d {
            if d != 1 && !matches!(self.distribution, Distribution::GaussianLogistic { .. }) {
                return Err(invalid("only gaussian-logistic data supports d > 1"));
            }
            for &n in &self.n {
                for &m in &self.m {
                    if m >= n {
                        return Err(invalid(format!("grid cell has m = {m} >= n = {n}")));
                    }
                    for &epsilon in &self.epsilon {
                        for &delta in &self.delta {
                            PrivacyBudget::new(epsilon, delta, m, 0)?;
                            for t in 0..self.trials {
                                cells.push(ExperimentCell {
                                    d,
                                    n,
                                    m,
                                    epsilon,
                                    delta,
                                    seed: self.seed.wrapping_add(t as u64),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(cells)
    }

    fn distribution_for(&self, d: usize) -> Distribution {
        match self.distribution {
            Distribution::GaussianLogistic { margin, .. } => Distribution::GaussianLogistic { d, margin },
            other => other,
        }
    }

    /// Runs every cell (in parallel when enabled); rows follow grid order.
    pub fn run(&self) -> Result<Vec<ExperimentRow>> {
        let cells = self.cells()?;
        map_indexed(Execution::default(), cells.len(), |i| self.run_cell(&cells[i]))
            .into_iter()
            .collect()
    }

    pub fn run_cell(&self, cell: &ExperimentCell) -> Result<ExperimentRow> {
        let spec = LossSpec {
            dimension: cell.d,
            ..self.loss.clone()
        };
        let base = LossModel::new(&spec)?;
        let dist = self.distribution_for(cell.d);
        let budget = PrivacyBudget::new(cell.epsilon, cell.delta, cell.m, cell.seed)?;
        let data = dist.sample_n(cell.n, cell.seed)?;
        let solved = if base.strong_convexity() == 0.0 {
            convex_surrogate(&base, cell.n, &budget)?
        } else {
            base.clone()
        };

        let u = DeleteRequest::new(data.instances()[..cell.m].to_vec());
        let model = learn_sc(&solved, &data)?;
        let out = unlearn_sc(&model, &solved, &u, &budget)?;
        let retrained = retrain_oracle(&solved, &data, &u)?;

        let test = dist.sample_n(self.test_samples, cell.seed ^ TEST_SEED_OFFSET)?;
        let risk = ExcessRisk::new(&base, &dist, &test)?;
        Ok(ExperimentRow {
            d: cell.d,
            n: cell.n,
            m: cell.m,
            epsilon: cell.epsilon,
            delta: cell.delta,
            seed: cell.seed,
            excess_learn: risk.of(&model.w_hat)?,
            excess_unlearn: risk.of(&out.w_tilde)?,
            excess_retrain: risk.of(&retrained.w_hat)?,
            gamma: out.gamma,
            sigma: out.sigma,
            sensitivity_measured: (&retrained.w_hat - &out.w_bar).norm(),
            sensitivity_bound: sensitivity_bound(&solved, cell.m, cell.n),
        })
    }
}

/// Excess population risk, exact for mean estimation and otherwise measured
/// on a held-out sample against that sample's own minimizer.
enum ExcessRisk<'a> {
    Analytic(&'a Distribution),
    Held {
        loss: &'a LossModel,
        test: &'a Dataset,
        floor: f64,
    },
}

impl<'a> ExcessRisk<'a> {
    fn new(loss: &'a LossModel, dist: &'a Distribution, test: &'a Dataset) -> Result<Self> {
        if loss.kind() == LossKind::MeanSquared && loss.l2() == 0.0 && dist.mean_estimation_optimum().is_some() {
            return Ok(ExcessRisk::Analytic(dist));
        }
        let reference = if loss.strong_convexity() > 0.0 {
            loss.clone()
        } else {
            loss.regularize(1.0 / test.len() as f64)?
        };
        let w_ref = learn_sc(&reference, test)?.w_hat;
        let floor = empirical_loss(loss, test, &w_ref)?;
        Ok(ExcessRisk::Held { loss, test, floor })
    }

    fn of(&self, w: &Vector) -> Result<f64> {
        match self {
            ExcessRisk::Analytic(dist) => Ok(analytic_excess_risk(dist, w).expect("checked in new")),
            ExcessRisk::Held { loss, test, floor } => Ok(empirical_loss(loss, test, w)? - floor),
        }
    }
}
