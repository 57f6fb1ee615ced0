// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Empirical risk minimization and empirical statistics.

use nalgebra::Cholesky;

use crate::data::Dataset;
use crate::error::{invalid, Result, UnlearnError};
use crate::exec::{chunked_reduce, Execution};
use crate::losses::{LossKind, LossModel, Matrix, Vector};

pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Newton polishing steps allowed after a closed-form solve.
const REFINE_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub w_hat: Vector,
    pub grad_norm_achieved: f64,
    pub iterations: usize,
    pub closed_form: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Run accelerated gradient descent even where a closed form exists.
    pub force_iterative: bool,
    pub exec: Execution,
}

impl SolveOptions {
    pub fn new(tol: f64) -> Self {
        SolveOptions {
            tol,
            max_iter: DEFAULT_MAX_ITER,
            force_iterative: false,
            exec: Execution::default(),
        }
    }
}

fn check_dims(loss: &LossModel, data: &Dataset, w: &Vector) -> Result<()> {
    loss.check_point(w)?;
    for z in data.iter() {
        if z.dimension() != loss.dimension() {
            return Err(UnlearnError::DimensionMismatch {
                expected: loss.dimension(),
                found: z.dimension(),
            });
        }
    }
    Ok(())
}

/// `(1/n) Σ f(w, zᵢ)`.
pub fn empirical_loss(loss: &LossModel, data: &Dataset, w: &Vector) -> Result<f64> {
    check_dims(loss, data, w)?;
    // evaluate once up front so shape errors surface before the parallel pass
    loss.evaluate(w, &data[0])?;
    let xs = data.instances();
    let total = chunked_reduce(
        Execution::default(),
        xs.len(),
        |r| xs[r].iter().map(|z| loss.data_value(w, z)).sum::<f64>(),
        |a, b| a + b,
    )
    .unwrap_or(0.0);
    Ok(total / xs.len() as f64 + 0.5 * loss.l2() * w.norm_squared())
}

pub fn empirical_gradient(loss: &LossModel, data: &Dataset, w: &Vector) -> Result<Vector> {
    empirical_gradient_with(Execution::default(), loss, data, w)
}

/// `(1/n) Σ ∇f(w, zᵢ)` with a fixed summation order.
pub fn empirical_gradient_with(
    exec: Execution,
    loss: &LossModel,
    data: &Dataset,
    w: &Vector,
) -> Result<Vector> {
    check_dims(loss, data, w)?;
    loss.gradient(w, &data[0])?;
    Ok(gradient_unchecked(exec, loss, data, w))
}

fn gradient_unchecked(exec: Execution, loss: &LossModel, data: &Dataset, w: &Vector) -> Vector {
    let xs = data.instances();
    let d = loss.dimension();
    let sum = chunked_reduce(
        exec,
        xs.len(),
        |r| {
            let mut acc = Vector::zeros(d);
            for z in &xs[r] {
                loss.add_data_gradient(w, z, 1.0, &mut acc);
            }
            acc
        },
        |a, b| a + b,
    )
    .unwrap_or_else(|| Vector::zeros(d));
    let mut g = sum / xs.len() as f64;
    g.axpy(loss.l2(), w, 1.0);
    g
}

pub fn hessian_statistic(loss: &LossModel, data: &Dataset, w: &Vector) -> Result<Matrix> {
    hessian_statistic_with(Execution::default(), loss, data, w)
}

/// `(1/n) Σ ∇²f(w, zᵢ)`, the statistic stored alongside a trained model.
pub fn hessian_statistic_with(
    exec: Execution,
    loss: &LossModel,
    data: &Dataset,
    w: &Vector,
) -> Result<Matrix> {
    check_dims(loss, data, w)?;
    loss.hessian(w, &data[0])?;
    let xs = data.instances();
    let d = loss.dimension();
    let sum = chunked_reduce(
        exec,
        xs.len(),
        |r| {
            let mut acc = Matrix::zeros(d, d);
            for z in &xs[r] {
                loss.add_data_hessian(w, z, 1.0, &mut acc);
            }
            acc
        },
        |a, b| a + b,
    )
    .unwrap_or_else(|| Matrix::zeros(d, d));
    let mut h = sum / xs.len() as f64;
    for i in 0..d {
        h[(i, i)] += loss.l2();
    }
    Ok(symmetrize(h))
}

pub(crate) fn symmetrize(h: Matrix) -> Matrix {
    let t = h.transpose();
    (h + t) * 0.5
}

/// Gradient-norm tolerance that pins the minimizer to within `1/(10 n²)`.
pub fn default_tolerance(loss: &LossModel, n: usize) -> f64 {
    let n = n.max(1) as f64;
    (loss.strong_convexity() / (10.0 * n * n)).min(1e-10)
}

pub fn minimize_empirical(loss: &LossModel, data: &Dataset, tol: f64) -> Result<SolveReport> {
    minimize_with(loss, data, &SolveOptions::new(tol))
}

pub fn minimize_with(loss: &LossModel, data: &Dataset, opts: &SolveOptions) -> Result<SolveReport> {
    if loss.strong_convexity() <= 0.0 {
        return Err(UnlearnError::NotStronglyConvex);
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let zero = Vector::zeros(loss.dimension());
    check_dims(loss, data, &zero)?;
    for z in data.iter() {
        loss.evaluate(&zero, z)?;
    }
    match loss.kind() {
        LossKind::MeanSquared | LossKind::RidgeRegression if !opts.force_iterative => {
            closed_form(loss, data, opts)
        }
        _ => accelerated_descent(loss, data, opts),
    }
}

fn closed_form(loss: &LossModel, data: &Dataset, opts: &SolveOptions) -> Result<SolveReport> {
    let d = loss.dimension();
    let n = data.len() as f64;
    let xs = data.instances();
    let mut w = match loss.kind() {
        LossKind::MeanSquared => {
            let sum = chunked_reduce(
                opts.exec,
                xs.len(),
                |r| {
                    let mut acc = Vector::zeros(d);
                    for z in &xs[r] {
                        acc += z.features();
                    }
                    acc
                },
                |a, b| a + b,
            )
            .unwrap_or_else(|| Vector::zeros(d));
            // stationarity: 2(w - mean) + l2 w = 0
            (sum / n) * (2.0 / (2.0 + loss.l2()))
        }
        LossKind::RidgeRegression => {
            // (2/n) XᵀX w + l2 w = (2/n) Xᵀy
            let rhs = chunked_reduce(
                opts.exec,
                xs.len(),
                |r| {
                    let mut acc = Vector::zeros(d);
                    for z in &xs[r] {
                        acc.axpy(z.label().unwrap_or(0.0), z.features(), 1.0);
                    }
                    acc
                },
                |a, b| a + b,
            )
            .unwrap_or_else(|| Vector::zeros(d))
                * (2.0 / n);
            let h = hessian_statistic_with(opts.exec, loss, data, &Vector::zeros(d))?;
            spd_solve(&h, &rhs, loss.strong_convexity())?
        }
        LossKind::RegularizedLogistic => unreachable!("no closed form"),
    };

    let mut g = gradient_unchecked(opts.exec, loss, data, &w);
    let mut steps = 0;
    while g.norm() > opts.tol && steps < REFINE_STEPS {
        let h = hessian_statistic_with(opts.exec, loss, data, &w)?;
        w -= spd_solve(&h, &g, loss.strong_convexity())?;
        g = gradient_unchecked(opts.exec, loss, data, &w);
        steps += 1;
    }
    let grad_norm = g.norm();
    if grad_norm > opts.tol {
        return Err(UnlearnError::NotConverged {
            iterations: steps,
            grad_norm,
            tol: opts.tol,
        });
    }
    Ok(SolveReport {
        w_hat: w,
        grad_norm_achieved: grad_norm,
        iterations: steps,
        closed_form: true,
    })
}

/// Nesterov's constant-momentum scheme for `β`-smooth, `λ`-strongly convex
/// objectives, started from the origin.
fn accelerated_descent(loss: &LossModel, data: &Dataset, opts: &SolveOptions) -> Result<SolveReport> {
    let beta = loss.smoothness();
    let lambda = loss.strong_convexity();
    let kappa_sqrt = (beta / lambda).sqrt();
    let momentum = (kappa_sqrt - 1.0) / (kappa_sqrt + 1.0);
    let step = 1.0 / beta;

    let mut x = Vector::zeros(loss.dimension());
    let mut y = x.clone();
    let mut grad_norm = f64::INFINITY;
    for it in 0..opts.max_iter {
        let g = gradient_unchecked(opts.exec, loss, data, &y);
        grad_norm = g.norm();
        if grad_norm <= opts.tol {
            return Ok(SolveReport {
                w_hat: y,
                grad_norm_achieved: grad_norm,
                iterations: it,
                closed_form: false,
            });
        }
        let x_next = &y - g * step;
        y = &x_next + (&x_next - &x) * momentum;
        x = x_next;
    }
    Err(UnlearnError::NotConverged {
        iterations: opts.max_iter,
        grad_norm,
        tol: opts.tol,
    })
}

/// Solves `h x = b` for symmetric `h` after confirming `λ_min(h) >= floor - 1e-8`.
pub fn spd_solve(h: &Matrix, b: &Vector, floor: f64) -> Result<Vector> {
    let required = floor - crate::unlearn::PSD_TOL;
    let min_eigenvalue = min_eigenvalue(h);
    if min_eigenvalue.is_nan() || min_eigenvalue < required || min_eigenvalue <= 0.0 {
        return Err(UnlearnError::NotPositiveDefinite {
            min_eigenvalue,
            required,
        });
    }
    let chol = Cholesky::new(h.clone()).ok_or(UnlearnError::NotPositiveDefinite {
        min_eigenvalue,
        required,
    })?;
    Ok(chol.solve(b))
}

pub fn min_eigenvalue(h: &Matrix) -> f64 {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::Instance;
    use approx::assert_relative_eq;

    fn bern5() -> Dataset {
        Dataset::new([0.0, 1.0, 1.0, 0.0, 1.0].map(|v| Instance::point([v])).to_vec()).unwrap()
    }

    #[test]
    fn empirical_loss_examples() {
        let ms = LossModel::mean_squared(1, 1.0).unwrap();
        let w = Vector::from_element(1, 0.6);
        // (0.36 + 0.16 + 0.16 + 0.36 + 0.16) / 5
        assert_relative_eq!(empirical_loss(&ms, &bern5(), &w).unwrap(), 0.24, max_relative = 1e-12);

        let single = Dataset::new(vec![Instance::point([0.3])]).unwrap();
        assert_relative_eq!(
            empirical_loss(&ms, &single, &w).unwrap(),
            ms.evaluate(&w, &single[0]).unwrap()
        );

        // at the sample mean the empirical loss is the (biased) sample variance
        let mean = Vector::from_element(1, 0.6);
        let var = [0.0f64, 1.0, 1.0, 0.0, 1.0].iter().map(|v| (v - 0.6).powi(2)).sum::<f64>() / 5.0;
        assert_relative_eq!(empirical_loss(&ms, &bern5(), &mean).unwrap(), var, max_relative = 1e-12);
    }

    #[test]
    fn minimize_examples() {
        let ms = LossModel::mean_squared(1, 1.0).unwrap();
        let rep = minimize_empirical(&ms, &bern5(), 1e-12).unwrap();
        assert_relative_eq!(rep.w_hat[0], 0.6, max_relative = 1e-14);
        assert!(rep.closed_form);

        // (w - 2)² + w²/2  =>  2(w - 2) + w = 0  =>  w = 4/3
        let rr = LossModel::ridge(1, 1.0, 2.0).unwrap();
        let data = Dataset::new(vec![Instance::labeled([1.0], 2.0)]).unwrap();
        let rep = minimize_empirical(&rr, &data, 1e-12).unwrap();
        assert_relative_eq!(rep.w_hat[0], 4.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn logistic_reaches_tolerance() {
        let lg = LossModel::logistic(2, 0.1, 1.0).unwrap();
        let data = Dataset::new(vec![
            Instance::labeled([0.5, 0.1], 1.0),
            Instance::labeled([-0.3, 0.8], -1.0),
            Instance::labeled([0.2, -0.6], 1.0),
        ])
        .unwrap();
        let rep = minimize_empirical(&lg, &data, 1e-11).unwrap();
        assert!(!rep.closed_form);
        let g = empirical_gradient(&lg, &data, &rep.w_hat).unwrap();
        assert!(g.norm() <= 1e-11);
        assert_eq!(g.norm(), rep.grad_norm_achieved);
    }

    #[test]
    fn rejects_non_strongly_convex_and_caps_iterations() {
        let lg = LossModel::logistic(1, 0.0, 1.0).unwrap();
        let data = Dataset::new(vec![Instance::labeled([0.5], 1.0)]).unwrap();
        assert!(matches!(
            minimize_empirical(&lg, &data, 1e-8),
            Err(UnlearnError::NotStronglyConvex)
        ));

        let lg = LossModel::logistic(1, 0.01, 1.0).unwrap();
        let opts = SolveOptions {
            max_iter: 3,
            ..SolveOptions::new(1e-14)
        };
        assert!(matches!(
            minimize_with(&lg, &data, &opts),
            Err(UnlearnError::NotConverged { iterations: 3, .. })
        ));
    }

    #[test]
    fn default_tolerance_examples() {
        let lam1 = LossModel::logistic(1, 1.0, 1.0).unwrap();
        assert_eq!(default_tolerance(&lam1, 100), 1e-10);
        assert_relative_eq!(default_tolerance(&lam1, 1_000_000), 1e-13, max_relative = 1e-12);
        let lam10 = LossModel::logistic(1, 10.0, 1.0).unwrap();
        assert_eq!(default_tolerance(&lam10, 1), 1e-10);
    }

    #[test]
    fn hessian_statistic_examples() {
        let ms = LossModel::mean_squared(2, 1.0).unwrap();
        let data = Dataset::new(vec![Instance::point([0.1, 0.2]), Instance::point([0.0, -0.3])]).unwrap();
        let h = hessian_statistic(&ms, &data, &Vector::from_element(2, 9.0)).unwrap();
        assert_eq!(h, Matrix::identity(2, 2) * 2.0);

        let rr = LossModel::ridge(2, 0.1, 1.0).unwrap();
        let data = Dataset::new(vec![
            Instance::labeled([1.0, 0.0], 0.3),
            Instance::labeled([0.0, 1.0], -0.5),
        ])
        .unwrap();
        let h = hessian_statistic(&rr, &data, &Vector::zeros(2)).unwrap();
        assert_relative_eq!(h, Matrix::identity(2, 2) * 1.1, epsilon = 1e-15);

        let lg = LossModel::logistic(2, 0.2, 1.0).unwrap();
        let one = Dataset::new(vec![Instance::labeled([0.6, -0.2], 1.0)]).unwrap();
        let w = Vector::from_column_slice(&[0.4, 1.0]);
        assert_relative_eq!(
            hessian_statistic(&lg, &one, &w).unwrap(),
            lg.hessian(&w, &one[0]).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ms = LossModel::mean_squared(2, 1.0).unwrap();
        assert!(matches!(
            empirical_loss(&ms, &bern5(), &Vector::zeros(2)),
            Err(UnlearnError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        let h = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            spd_solve(&h, &Vector::zeros(2), 0.0),
            Err(UnlearnError::NotPositiveDefinite { .. })
        ));
    }
}
