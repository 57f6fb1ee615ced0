// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Verification against retraining from scratch.
//!
//! The retrain oracle recomputes the minimizer on `S ∖ U` directly. The
//! sensitivity and drift checks compare it with the Newton-step point and
//! with the original minimizer; each solved arm contributes `2·tol/λ` of
//! slack because minimizers are only computed to a gradient tolerance.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::data::Dataset;
use crate::distribution::Distribution;
use crate::error::{invalid, Result, UnlearnError};
use crate::exec::{chunked_reduce, map_indexed, Execution};
use crate::losses::{Instance, LossKind, LossModel, Vector};
use crate::unlearn::{learn_sc, newton_unlearn_point, DeleteRequest, PrivacyBudget, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(measured: f64, bound: f64, slack: f64) -> Self {
        BoundCheck {
            measured,
            bound,
            slack,
            pass: measured <= bound + slack,
        }
    }
}

/// Trains on `S ∖ U` with the same loss (and hence the same regularization).
pub fn retrain_oracle(loss: &LossModel, data: &Dataset, u: &DeleteRequest) -> Result<TrainedModel> {
    if u.m() >= data.len() {
        return Err(UnlearnError::TooManyDeletions {
            m: u.m(),
            n: data.len(),
        });
    }
    let rest = data.without(u.samples())?;
    learn_sc(loss, &rest)
}

/// `2 M L² m² / (λ³ n²)`.
pub fn sensitivity_bound(loss: &LossModel, m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    let l = loss.lipschitz();
    2.0 * loss.hessian_lipschitz() * l * l * m * m / (loss.strong_convexity().powi(3) * n * n)
}

/// `2 m L / (λ n)`.
pub fn drift_bound(loss: &LossModel, m: usize, n: usize) -> f64 {
    2.0 * m as f64 * loss.lipschitz() / (loss.strong_convexity() * n as f64)
}

/// Both arms of a deletion, computed once and shared by the bound checks.
#[derive(Debug, Clone)]
pub struct DeletionAudit {
    pub model: TrainedModel,
    pub retrained: TrainedModel,
    pub w_bar: Vector,
    pub m: usize,
}

impl DeletionAudit {
    pub fn run(loss: &LossModel, data: &Dataset, u: &DeleteRequest) -> Result<Self> {
        let retrained = retrain_oracle(loss, data, u)?;
        let model = learn_sc(loss, data)?;
        let w_bar = newton_unlearn_point(&model, loss, u)?;
        Ok(DeletionAudit {
            model,
            retrained,
            w_bar,
            m: u.m(),
        })
    }

    fn slack(&self, loss: &LossModel) -> f64 {
        2.0 * (self.model.solve_tol + self.retrained.solve_tol) / loss.strong_convexity()
    }

    pub fn sensitivity(&self, loss: &LossModel) -> BoundCheck {
        BoundCheck::new(
            (&self.retrained.w_hat - &self.w_bar).norm(),
            sensitivity_bound(loss, self.m, self.model.n),
            self.slack(loss),
        )
    }

    pub fn drift(&self, loss: &LossModel) -> BoundCheck {
        BoundCheck::new(
            (&self.retrained.w_hat - &self.model.w_hat).norm(),
            drift_bound(loss, self.m, self.model.n),
            self.slack(loss),
        )
    }
}

pub fn sensitivity_check(loss: &LossModel, data: &Dataset, u: &DeleteRequest) -> Result<BoundCheck> {
    Ok(DeletionAudit::run(loss, data, u)?.sensitivity(loss))
}

pub fn drift_check(loss: &LossModel, data: &Dataset, u: &DeleteRequest) -> Result<BoundCheck> {
    Ok(DeletionAudit::run(loss, data, u)?.drift(loss))
}

/// Gaussian-mechanism certificate: `measured` is the noise scale a shift of
/// `gamma_measured` requires, `bound` the noise scale actually used.
pub fn privacy_audit(gamma_measured: f64, budget: &PrivacyBudget, sigma: f64) -> BoundCheck {
    let required = gamma_measured / budget.epsilon * budget.gaussian_multiplier();
    BoundCheck::new(required, sigma, 1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Draws per independently seeded stream in Monte-Carlo estimates.
const MC_CHUNK: usize = 4096;

#[derive(Clone, Copy)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// `‖w − μ‖²`: excess risk of the squared-distance loss, when `μ` is known.
pub fn analytic_excess_risk(dist: &Distribution, w: &Vector) -> Option<f64> {
    dist.mean_estimation_optimum()
        .map(|(mu, _)| (w - mu).norm_squared())
}

/// Monte-Carlo estimate of `E f(w, z) − F*` over fresh draws from `dist`.
///
/// `f_star` overrides the reference value; without it the distribution must
/// have a closed-form optimum for the (unregularized) mean-squared loss.
pub fn excess_risk_mc(
    loss: &LossModel,
    dist: &Distribution,
    w: &Vector,
    trials: usize,
    seed: u64,
    f_star: Option<f64>,
) -> Result<McEstimate> {
    if trials < 2 {
        return Err(invalid("excess_risk_mc needs at least 2 trials"));
    }
    dist.validate()?;
    let f_star = match f_star {
        Some(f) => f,
        None => match dist.mean_estimation_optimum() {
            Some((_, f)) if loss.kind() == LossKind::MeanSquared && loss.l2() == 0.0 => f,
            _ => return Err(invalid("no analytic optimum for this loss and distribution; supply F*")),
        },
    };
    loss.evaluate(w, &dist.sample(&mut ChaCha20Rng::seed_from_u64(seed)))?;
    let chunks = trials.div_ceil(MC_CHUNK);
    let moments = chunked_reduce(
        Execution::default(),
        chunks,
        |range| {
            let mut acc = Moments {
                count: 0.0,
                mean: 0.0,
                m2: 0.0,
            };
            for c in range {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let draws = MC_CHUNK.min(trials - c * MC_CHUNK);
                for _ in 0..draws {
                    let z = dist.sample(&mut rng);
                    acc.push(loss.data_value(w, &z));
                }
            }
            acc
        },
        Moments::merge,
    )
    .expect("trials >= 2");
    let reg = 0.5 * loss.l2() * w.norm_squared();
    let var = moments.m2 / (moments.count - 1.0);
    Ok(McEstimate {
        estimate: moments.mean + reg - f_star,
        std_error: (var / moments.count).sqrt(),
    })
}

/// Deletes each sample with probability `[D₁(z) − D₂(z)]₊ / D₁(z)`, in order,
/// stopping once `m_max` samples have been removed.
pub fn adversarial_delete(
    data: &Dataset,
    d1: &Distribution,
    d2: &Distribution,
    m_max: usize,
    seed: u64,
) -> Result<DeleteRequest> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut deleted = Vec::new();
    for z in data.iter() {
        if deleted.len() >= m_max {
            break;
        }
        let (p1, p2) = match (d1.density(z), d2.density(z)) {
            (Some(p1), Some(p2)) => (p1, p2),
            _ => return Err(invalid("adversary needs pointwise densities")),
        };
        if p1 <= 0.0 {
            return Err(UnlearnError::ZeroDensity);
        }
        let prob = (p1 - p2).max(0.0) / p1;
        if rng.random::<f64>() < prob {
            deleted.push(z.clone());
        }
    }
    Ok(DeleteRequest::new(deleted))
}

/// `n/(n − m) · (ŵ − (1/n) Σ_{z∈U} z)`: the exact sample mean after deletion.
pub fn exact_mean_unlearn(w_hat: &Vector, n: usize, u: &DeleteRequest) -> Result<Vector> {
    let m = u.m();
    if m >= n {
        return Err(UnlearnError::TooManyDeletions { m, n });
    }
    let mut removed = Vector::zeros(w_hat.len());
    for z in u.samples() {
        if z.dimension() != w_hat.len() {
            return Err(UnlearnError::DimensionMismatch {
                expected: w_hat.len(),
                found: z.dimension(),
            });
        }
        removed += z.features();
    }
    let nf = n as f64;
    Ok((w_hat - removed / nf) * (nf / (nf - m as f64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoArm {
    Adversarial,
    Random,
}

impl DemoArm {
    pub fn name(self) -> &'static str {
        match self {
            DemoArm::Adversarial => "adversarial",
            DemoArm::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoArmResult {
    pub arm: DemoArm,
    /// Output of the exact mean update.
    pub mean_estimate: f64,
    /// Minimizer retrained on the remaining points.
    pub retrain_mean: f64,
    /// `(mean_estimate − 1/2)²`.
    pub excess_risk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoDraw {
    pub n: usize,
    pub m: usize,
    pub baseline_mean: f64,
    pub adversarial: DemoArmResult,
    pub random: DemoArmResult,
}

/// Mean estimation over Bernoulli(1/2) with `m` deletions chosen either
/// among the ones (adversarial) or uniformly at random.
pub fn population_risk_demo(n: usize, m: usize, seed: u64) -> Result<DemoDraw> {
    if 2 * m >= n {
        return Err(invalid(format!("demo needs m < n/2, got m = {m}, n = {n}")));
    }
    let dist = Distribution::Bernoulli { p: 0.5 };
    let data = dist.sample_n(n, seed)?;
    let loss = LossModel::mean_squared(1, 1.0)?;
    let model = learn_sc(&loss, &data)?;

    let ones: Vec<Instance> = data
        .iter()
        .filter(|z| z.features()[0] == 1.0)
        .take(m)
        .cloned()
        .collect();
    if ones.len() < m {
        return Err(invalid(format!("only {} ones in the sample, need {m}", ones.len())));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let picked = index::sample(&mut rng, n, m);
    let random: Vec<Instance> = picked.iter().map(|i| data[i].clone()).collect();

    let arm = |arm: DemoArm, samples: Vec<Instance>| -> Result<DemoArmResult> {
        let u = DeleteRequest::new(samples);
        let mean_estimate = exact_mean_unlearn(&model.w_hat, n, &u)?[0];
        let retrain_mean = retrain_oracle(&loss, &data, &u)?.w_hat[0];
        Ok(DemoArmResult {
            arm,
            mean_estimate,
            retrain_mean,
            excess_risk: (mean_estimate - 0.5).powi(2),
        })
    };
    Ok(DemoDraw {
        n,
        m,
        baseline_mean: model.w_hat[0],
        adversarial: arm(DemoArm::Adversarial, ones)?,
        random: arm(DemoArm::Random, random)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoSummary {
    pub arm: DemoArm,
    pub n: usize,
    pub m: usize,
    pub mean_estimate: f64,
    pub excess_risk: f64,
    pub std_error: f64,
    /// Fraction of draws whose excess risk exceeds 0.01.
    pub above_threshold: f64,
}

/// Runs the demo for seeds `seed, seed + 1, …` and averages each arm.
pub fn population_risk_summary(n: usize, m: usize, trials: usize, seed: u64) -> Result<Vec<DemoSummary>> {
    if trials < 2 {
        return Err(invalid("demo summary needs at least 2 trials"));
    }
    let draws = map_indexed(Execution::default(), trials, |i| {
        population_risk_demo(n, m, seed.wrapping_add(i as u64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let summarize = |arm: DemoArm, pick: &dyn Fn(&DemoDraw) -> DemoArmResult| {
        let mut est = Moments {
            count: 0.0,
            mean: 0.0,
            m2: 0.0,
        };
        let mut mean_sum = 0.0;
        let mut above = 0usize;
        for d in &draws {
            let r = pick(d);
            est.push(r.excess_risk);
            mean_sum += r.mean_estimate;
            above += usize::from(r.excess_risk > 0.01);
        }
        let t = trials as f64;
        DemoSummary {
            arm,
            n,
            m,
            mean_estimate: mean_sum / t,
            excess_risk: est.mean,
            std_error: (est.m2 / (t - 1.0) / t).sqrt(),
            above_threshold: above as f64 / t,
        }
    };
    Ok(vec![
        summarize(DemoArm::Adversarial, &|d| d.adversarial),
        summarize(DemoArm::Random, &|d| d.random),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pts(xs: &[f64]) -> Vec<Instance> {
        xs.iter().map(|&v| Instance::point([v])).collect()
    }

    fn bern5() -> Dataset {
        Dataset::new(pts(&[0.0, 1.0, 1.0, 0.0, 1.0])).unwrap()
    }

    #[test]
    fn retrain_examples() {
        let ms = LossModel::mean_squared(1, 1.0).unwrap();
        let r = retrain_oracle(&ms, &bern5(), &DeleteRequest::new(pts(&[1.0]))).unwrap();
        assert_relative_eq!(r.w_hat[0], 0.5, max_relative = 1e-14);
        let same = retrain_oracle(&ms, &bern5(), &DeleteRequest::empty()).unwrap();
        assert_eq!(same, learn_sc(&ms, &bern5()).unwrap());
        let last = retrain_oracle(&ms, &bern5(), &DeleteRequest::new(pts(&[0.0, 1.0, 1.0, 1.0]))).unwrap();
        assert_eq!(last.w_hat[0], 0.0);
        assert!(matches!(
            retrain_oracle(&ms, &bern5(), &DeleteRequest::new(pts(&[0.5]))),
            Err(UnlearnError::NotInDataset(0))
        ));
    }

    #[test]
    fn drift_example() {
        let ms = LossModel::mean_squared(1, 1.0).unwrap();
        let c = drift_check(&ms, &bern5(), &DeleteRequest::new(pts(&[1.0]))).unwrap();
        assert_relative_eq!(c.measured, 0.1, max_relative = 1e-12);
        // 2·1·4 / (2·5)
        assert_relative_eq!(c.bound, 0.8, max_relative = 1e-15);
        assert!(c.pass);

        let c0 = drift_check(&ms, &bern5(), &DeleteRequest::empty()).unwrap();
        assert!(c0.measured <= c0.slack && c0.pass);

        let c4 = drift_check(&ms, &bern5(), &DeleteRequest::new(pts(&[1.0, 1.0, 1.0, 0.0]))).unwrap();
        assert!(c4.bound.is_finite());
    }

    #[test]
    fn sensitivity_on_quadratic_is_exact() {
        let ms = LossModel::mean_squared(1, 1.0).unwrap();
        let c = sensitivity_check(&ms, &bern5(), &DeleteRequest::new(pts(&[1.0, 0.0]))).unwrap();
        assert_eq!(c.bound, 0.0);
        assert!(c.measured <= c.slack && c.pass);
    }

    #[test]
    fn privacy_audit_examples() {
        let b = PrivacyBudget::new(1.0, 1e-5, 10, 0).unwrap();
        assert!(privacy_audit(2e-4, &b, 9.690e-4).pass);
        let needed = 2e-4 * b.gaussian_multiplier();
        assert!(!privacy_audit(2e-4, &b, needed / 2.0).pass);
        assert!(privacy_audit(0.0, &b, 0.0).pass);
    }

    #[test]
    fn excess_risk_examples() {
        let ms = LossModel::mean_squared(1, 1.0).unwrap();
        let dist = Distribution::Bernoulli { p: 0.5 };
        for (w, exact) in [(0.6, 0.01), (0.375, 0.015625), (0.5, 0.0)] {
            let w = Vector::from_element(1, w);
            assert_relative_eq!(analytic_excess_risk(&dist, &w).unwrap(), exact, epsilon = 1e-15);
            let est = excess_risk_mc(&ms, &dist, &w, 20_000, 3, None).unwrap();
            assert!((est.estimate - exact).abs() <= 3.0 * est.std_error + 1e-15, "{est:?} vs {exact}");
        }
        let w = Vector::from_element(1, 0.5);
        assert!(excess_risk_mc(&ms, &dist, &w, 1, 3, None).is_err());
        let lg = LossModel::logistic(1, 0.1, 1.0).unwrap();
        assert!(excess_risk_mc(&lg, &dist, &w, 100, 3, None).is_err());
        assert_eq!(
            excess_risk_mc(&ms, &dist, &w, 10_000, 5, None).unwrap(),
            excess_risk_mc(&ms, &dist, &w, 10_000, 5, None).unwrap()
        );
    }

    #[test]
    fn adversary_examples() {
        let d1 = Distribution::UniformInterval { a: 0.25, b: 0.75 };
        let data = d1.sample_n(500, 4).unwrap();
        assert!(adversarial_delete(&data, &d1, &d1, 100, 1).unwrap().is_empty());
        let d2 = Distribution::UniformInterval { a: 0.0, b: 0.5 };
        assert!(adversarial_delete(&data, &d1, &d2, 0, 1).unwrap().is_empty());
        let u = adversarial_delete(&data, &d1, &d2, 10, 1).unwrap();
        assert_eq!(u.m(), 10);
        assert!(u.samples().iter().all(|z| z.features()[0] > 0.5));
        let narrow = Distribution::UniformInterval { a: 0.0, b: 0.1 };
        assert!(matches!(
            adversarial_delete(&data, &narrow, &d2, 10, 1),
            Err(UnlearnError::ZeroDensity)
        ));
    }

    #[test]
    fn exact_mean_examples() {
        let w = Vector::from_element(1, 0.6);
        let out = exact_mean_unlearn(&w, 5, &DeleteRequest::new(pts(&[1.0]))).unwrap();
        assert_relative_eq!(out[0], 0.5, max_relative = 1e-15);
        assert_eq!(exact_mean_unlearn(&w, 5, &DeleteRequest::empty()).unwrap(), w);
        let w = Vector::from_element(1, 0.5);
        let out = exact_mean_unlearn(&w, 4, &DeleteRequest::new(pts(&[1.0, 1.0]))).unwrap();
        assert_eq!(out[0], 0.0);
        assert!(exact_mean_unlearn(&w, 2, &DeleteRequest::new(pts(&[1.0, 1.0]))).is_err());
    }

    #[test]
    fn demo_arms_agree_with_retraining() {
        let draw = population_risk_demo(200, 40, 11).unwrap();
        for arm in [draw.adversarial, draw.random] {
            assert!((arm.mean_estimate - arm.retrain_mean).abs() <= 1e-10);
        }
        assert!(draw.adversarial.mean_estimate < draw.baseline_mean);
        let zero = population_risk_demo(200, 0, 11).unwrap();
        assert_eq!(zero.adversarial.mean_estimate, zero.random.mean_estimate);
        assert!(population_risk_demo(10, 5, 1).is_err());
    }
}
