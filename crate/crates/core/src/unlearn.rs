// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Learning and unlearning with a stored Hessian statistic.
//!
//! [`learn_sc`] trains a strongly convex model and keeps only `ŵ` and the
//! empirical Hessian at `ŵ`. [`unlearn_sc`] removes a batch of samples by a
//! single Newton step on the remaining empirical objective,
//!
//! ```text
//! Ĥ = (n·∇²F̂(ŵ) − Σ_{z∈U} ∇²f(ŵ, z)) / (n − m)
//! w̄ = ŵ + Ĥ⁻¹ Σ_{z∈U} ∇f(ŵ, z) / (n − m)
//! ```
//!
//! and releases `w̄ + N(0, σ²I)` with `σ` calibrated to the worst-case gap
//! between `w̄` and the retrained minimizer. [`learn_c`] and [`unlearn_c`]
//! handle merely convex losses by adding an L2 term first.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Result, UnlearnError};
use crate::losses::{Instance, LossFingerprint, LossModel, Matrix, Vector};
use crate::solver::{self, spd_solve, symmetrize};

/// Eigenvalue slack tolerated below the strong-convexity floor.
pub const PSD_TOL: f64 = 1e-8;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub w_hat: Vector,
    /// Empirical Hessian `∇²F̂(ŵ)`.
    pub hessian_stat: Matrix,
    pub n: usize,
    pub fingerprint: LossFingerprint,
    /// Gradient-norm tolerance the minimizer was solved to.
    pub solve_tol: f64,
}

/// The samples to forget, passed by value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeleteRequest {
    samples: Vec<Instance>,
}

impl DeleteRequest {
    pub fn new(samples: Vec<Instance>) -> Self {
        DeleteRequest { samples }
    }

    pub fn empty() -> Self {
        DeleteRequest::default()
    }

    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Instance] {
        &self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
    pub m_budget: usize,
    pub seed: u64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64, m_budget: usize, seed: u64) -> Result<Self> {
        let b = PrivacyBudget {
            epsilon,
            delta,
            m_budget,
            seed,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    /// `√(2 ln(1.25/δ))`, the Gaussian-mechanism multiplier.
    pub fn gaussian_multiplier(&self) -> f64 {
        (2.0 * (1.25 / self.delta).ln()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCalibration {
    /// Bound on `‖w̄ − retrained minimizer‖` for `m_budget` deletions.
    pub gamma: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnlearnOutput {
    pub w_tilde: Vector,
    /// Pre-noise point; for audits only.
    pub w_bar: Vector,
    pub gamma: f64,
    pub sigma: f64,
    pub m_used: usize,
}

fn check_fingerprint(model: &TrainedModel, loss: &LossModel) -> Result<()> {
    if model.fingerprint != loss.fingerprint() {
        return Err(UnlearnError::FingerprintMismatch);
    }
    Ok(())
}

fn check_request(model: &TrainedModel, loss: &LossModel, u: &DeleteRequest) -> Result<()> {
    check_fingerprint(model, loss)?;
    if u.m() >= model.n {
        return Err(UnlearnError::TooManyDeletions { m: u.m(), n: model.n });
    }
    u.samples().iter().try_for_each(|z| loss.check_instance(z))
}

/// Trains on `data` and keeps `(ŵ, ∇²F̂(ŵ))`; the data itself is dropped.
pub fn learn_sc(loss: &LossModel, data: &Dataset) -> Result<TrainedModel> {
    data.validate_for(loss)?;
    let tol = solver::default_tolerance(loss, data.len());
    let report = solver::minimize_empirical(loss, data, tol)?;
    let hessian_stat = solver::hessian_statistic(loss, data, &report.w_hat)?;
    Ok(TrainedModel {
        w_hat: report.w_hat,
        hessian_stat,
        n: data.len(),
        fingerprint: loss.fingerprint(),
        solve_tol: tol,
    })
}

/// Hessian of the empirical objective over the remaining `n − m` samples,
/// reconstructed from the stored statistic.
pub fn assemble_deleted_hessian(
    model: &TrainedModel,
    loss: &LossModel,
    u: &DeleteRequest,
) -> Result<Matrix> {
    check_request(model, loss, u)?;
    let n = model.n as f64;
    let mut h = &model.hessian_stat * n;
    for z in u.samples() {
        h -= loss.hessian(&model.w_hat, z)?;
    }
    let h = symmetrize(h / (n - u.m() as f64));
    let required = loss.strong_convexity() - PSD_TOL;
    let min_eigenvalue = solver::min_eigenvalue(&h);
    if min_eigenvalue.is_nan() || min_eigenvalue < required {
        return Err(UnlearnError::NotPositiveDefinite {
            min_eigenvalue,
            required,
        });
    }
    Ok(h)
}

/// The Newton-step estimate `w̄` of the minimizer over the remaining samples.
pub fn newton_unlearn_point(
    model: &TrainedModel,
    loss: &LossModel,
    u: &DeleteRequest,
) -> Result<Vector> {
    let h = assemble_deleted_hessian(model, loss, u)?;
    if u.is_empty() {
        return Ok(model.w_hat.clone());
    }
    let mut grad = Vector::zeros(loss.dimension());
    for z in u.samples() {
        grad += loss.gradient(&model.w_hat, z)?;
    }
    let step = spd_solve(&h, &grad, loss.strong_convexity())?;
    Ok(&model.w_hat + step / (model.n - u.m()) as f64)
}

/// `γ = 2 M m² L² / (λ³ n²)` and `σ = (γ/ε) √(2 ln(1.25/δ))` with `m = m_budget`.
pub fn noise_scale(loss: &LossModel, n: usize, budget: &PrivacyBudget) -> Result<NoiseCalibration> {
    budget.validate()?;
    let lambda = loss.strong_convexity();
    if lambda <= 0.0 {
        return Err(UnlearnError::NotStronglyConvex);
    }
    if budget.m_budget >= n {
        return Err(UnlearnError::TooManyDeletions {
            m: budget.m_budget,
            n,
        });
    }
    Ok(calibrate(
        loss.lipschitz(),
        lambda,
        loss.hessian_lipschitz(),
        budget.m_budget,
        n,
        budget,
    ))
}

/// The two calibration formulas on raw constants.
pub fn calibrate(
    lipschitz: f64,
    lambda: f64,
    hessian_lipschitz: f64,
    m: usize,
    n: usize,
    budget: &PrivacyBudget,
) -> NoiseCalibration {
    let (m, n) = (m as f64, n as f64);
    let gamma = 2.0 * hessian_lipschitz * m * m * lipschitz * lipschitz / (lambda.powi(3) * n * n);
    let sigma = gamma / budget.epsilon * budget.gaussian_multiplier();
    NoiseCalibration { gamma, sigma }
}

/// `σ·g` for a standard-normal `g ∈ R^d` drawn from a ChaCha20 stream.
pub fn gaussian_noise(d: usize, sigma: f64, seed: u64) -> Vector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Vector::from_iterator(
        d,
        (0..d).map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            sigma * g
        }),
    )
}

pub fn unlearn_sc(
    model: &TrainedModel,
    loss: &LossModel,
    u: &DeleteRequest,
    budget: &PrivacyBudget,
) -> Result<UnlearnOutput> {
    check_fingerprint(model, loss)?;
    if u.m() > budget.m_budget {
        return Err(UnlearnError::BudgetExceeded {
            m: u.m(),
            budget: budget.m_budget,
        });
    }
    let calib = noise_scale(loss, model.n, budget)?;
    let w_bar = newton_unlearn_point(model, loss, u)?;
    let w_tilde = &w_bar + gaussian_noise(loss.dimension(), calib.sigma, budget.seed);
    Ok(UnlearnOutput {
        w_tilde,
        w_bar,
        gamma: calib.gamma,
        sigma: calib.sigma,
        m_used: u.m(),
    })
}

/// Regularization strength for the convex reduction.
///
/// Without deletions this is `L/(B√n)`; otherwise the larger of
/// `(L/B)√(m/n)` and `(√d M m² L³ √ln(1/δ) / (B² n² ε))^{1/4}`.
pub fn select_lambda_convex(loss: &LossModel, n: usize, budget: &PrivacyBudget) -> Result<f64> {
    budget.validate()?;
    let b = loss
        .minimizer_norm_bound()
        .ok_or(UnlearnError::MissingMinimizerBound)?;
    if loss.strong_convexity() != 0.0 {
        return Err(invalid("convex wrapper expects a base loss with lambda = 0"));
    }
    if n == 0 {
        return Err(UnlearnError::EmptyDataset);
    }
    let l = loss.lipschitz();
    let nf = n as f64;
    if budget.m_budget == 0 {
        return Ok(l / (b * nf.sqrt()));
    }
    let m = budget.m_budget as f64;
    let d = loss.dimension() as f64;
    let first = (l / b) * (m / nf).sqrt();
    let inner = d.sqrt() * loss.hessian_lipschitz() * m * m * l.powi(3) * (1.0 / budget.delta).ln().sqrt()
        / (b * b * nf * nf * budget.epsilon);
    Ok(first.max(inner.sqrt().sqrt()))
}

/// The strongly convex surrogate `f + (λ/2)‖w‖²` used by the convex wrapper.
pub fn convex_surrogate(loss: &LossModel, n: usize, budget: &PrivacyBudget) -> Result<LossModel> {
    let lambda = select_lambda_convex(loss, n, budget)?;
    loss.regularize(lambda)
}

pub fn learn_c(loss: &LossModel, data: &Dataset, budget: &PrivacyBudget) -> Result<TrainedModel> {
    let surrogate = convex_surrogate(loss, data.len(), budget)?;
    learn_sc(&surrogate, data)
}

/// Unlearning for a model from [`learn_c`]; `loss` is the convex base loss.
pub fn unlearn_c(
    model: &TrainedModel,
    loss: &LossModel,
    u: &DeleteRequest,
    budget: &PrivacyBudget,
) -> Result<UnlearnOutput> {
    let surrogate = convex_surrogate(loss, model.n, budget)?;
    unlearn_sc(model, &surrogate, u, budget)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    loss_fingerprint: LossFingerprint,
    n: usize,
    solve_tol: f64,
    w_hat: Vec<f64>,
    /// Row-major `d × d`.
    hessian_stat: Vec<f64>,
}

impl TrainedModel {
    pub fn to_json(&self) -> String {
        let d = self.w_hat.len();
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            loss_fingerprint: self.fingerprint.clone(),
            n: self.n,
            solve_tol: self.solve_tol,
            w_hat: self.w_hat.iter().copied().collect(),
            hessian_stat: (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|ij| self.hessian_stat[ij])
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| UnlearnError::Format(e.to_string()))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(UnlearnError::Format(format!(
                "unsupported format_version {}",
                file.format_version
            )));
        }
        let d = file.loss_fingerprint.d;
        if file.w_hat.len() != d || file.hessian_stat.len() != d * d {
            return Err(UnlearnError::Format(format!(
                "expected {d} weights and {} Hessian entries",
                d * d
            )));
        }
        if file.n == 0 {
            return Err(UnlearnError::Format("n must be at least 1".into()));
        }
        let h = Matrix::from_row_slice(d, d, &file.hessian_stat);
        if h != h.transpose() {
            return Err(UnlearnError::Format("hessian_stat is not symmetric".into()));
        }
        let required = file.loss_fingerprint.lambda - PSD_TOL;
        let min_eigenvalue = solver::min_eigenvalue(&h);
        if min_eigenvalue.is_nan() || min_eigenvalue < required {
            return Err(UnlearnError::NotPositiveDefinite {
                min_eigenvalue,
                required,
            });
        }
        Ok(TrainedModel {
            w_hat: Vector::from_vec(file.w_hat),
            hessian_stat: h,
            n: file.n,
            fingerprint: file.loss_fingerprint,
            solve_tol: file.solve_tol,
        })
    }
}
