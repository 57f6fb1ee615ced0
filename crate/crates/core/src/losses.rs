// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Convex loss families with certified constants.
//!
//! Every [`LossModel`] carries the four constants the deletion bounds are
//! stated in: the Lipschitz constant `L`, the strong-convexity modulus
//! `lambda`, the Hessian-Lipschitz constant `M` and an optional bound `B` on
//! the norm of a population minimizer. The constants are derived from the
//! loss kind, its explicit L2 coefficient and the data radius; they are
//! never estimated from data.
//!
//! Quadratic losses are not globally Lipschitz, so `L` is certified over the
//! parameter ball `‖w‖ <= domain_radius` that provably contains every
//! empirical minimizer of the loss, together with `‖z‖ <= data_radius`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, UnlearnError};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative slack allowed when checking `‖z‖ <= data_radius`.
const RADIUS_SLACK: f64 = 1e-9;

/// `max |s''(t)|` for the logistic sigmoid `s`, attained at `s = 1/2 ± 1/(2√3)`.
pub const SIGMOID_SECOND_DERIVATIVE_MAX: f64 = 0.096_225_044_864_937_63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// `‖w − z‖²` over unlabeled points (mean estimation).
    MeanSquared,
    /// `(⟨w, x⟩ − y)²` over labeled pairs.
    RidgeRegression,
    /// `ln(1 + exp(−y⟨w, x⟩))` over labeled pairs with `y ∈ {−1, +1}`.
    RegularizedLogistic,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::MeanSquared => "mean-squared",
            LossKind::RidgeRegression => "ridge-regression",
            LossKind::RegularizedLogistic => "regularized-logistic",
        }
    }

    pub fn is_supervised(self) -> bool {
        !matches!(self, LossKind::MeanSquared)
    }
}

/// A single training example.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Point(Vector),
    Labeled { x: Vector, y: f64 },
}

impl Instance {
    pub fn point(values: impl IntoIterator<Item = f64>) -> Self {
        Instance::Point(Vector::from_vec(values.into_iter().collect()))
    }

    pub fn labeled(features: impl IntoIterator<Item = f64>, y: f64) -> Self {
        Instance::Labeled {
            x: Vector::from_vec(features.into_iter().collect()),
            y,
        }
    }

    pub fn features(&self) -> &Vector {
        match self {
            Instance::Point(v) => v,
            Instance::Labeled { x, .. } => x,
        }
    }

    pub fn label(&self) -> Option<f64> {
        match self {
            Instance::Point(_) => None,
            Instance::Labeled { y, .. } => Some(*y),
        }
    }

    pub fn dimension(&self) -> usize {
        self.features().len()
    }
}

/// Declarative description of a loss, as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub kind: LossKind,
    #[serde(alias = "d")]
    pub dimension: usize,
    /// Explicit L2 coefficient. Must be zero (or absent) for mean-squared.
    #[serde(default)]
    pub lambda: f64,
    pub data_radius: f64,
    #[serde(default, rename = "B", alias = "minimizer_norm_bound")]
    pub minimizer_norm_bound: Option<f64>,
}

/// Fields binding a trained model to the loss it was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossFingerprint {
    pub kind: LossKind,
    pub d: usize,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    pub lambda: f64,
    #[serde(rename = "M")]
    pub hessian_lipschitz: f64,
    #[serde(rename = "B")]
    pub minimizer_norm_bound: Option<f64>,
    pub data_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossModel {
    kind: LossKind,
    dimension: usize,
    l2: f64,
    data_radius: f64,
    minimizer_norm_bound: Option<f64>,
    lipschitz: f64,
    strong_convexity: f64,
    hessian_lipschitz: f64,
    smoothness: f64,
    domain_radius: f64,
}

impl LossModel {
    pub fn new(spec: &LossSpec) -> Result<Self> {
        if spec.kind == LossKind::MeanSquared && spec.lambda != 0.0 {
            return Err(invalid(
                "mean-squared carries no explicit lambda; use regularize",
            ));
        }
        Self::certify(
            spec.kind,
            spec.dimension,
            spec.lambda,
            spec.data_radius,
            spec.minimizer_norm_bound,
        )
    }

    pub fn mean_squared(dimension: usize, data_radius: f64) -> Result<Self> {
        Self::certify(LossKind::MeanSquared, dimension, 0.0, data_radius, None)
    }

    pub fn ridge(dimension: usize, lambda: f64, data_radius: f64) -> Result<Self> {
        Self::certify(LossKind::RidgeRegression, dimension, lambda, data_radius, None)
    }

    /// Least squares without regularization; needs `B` to fix its certified ball.
    pub fn least_squares(dimension: usize, data_radius: f64, bound: f64) -> Result<Self> {
        Self::certify(
            LossKind::RidgeRegression,
            dimension,
            0.0,
            data_radius,
            Some(bound),
        )
    }

    pub fn logistic(dimension: usize, lambda: f64, data_radius: f64) -> Result<Self> {
        Self::certify(
            LossKind::RegularizedLogistic,
            dimension,
            lambda,
            data_radius,
            None,
        )
    }

    pub fn with_minimizer_bound(&self, bound: f64) -> Result<Self> {
        Self::certify(self.kind, self.dimension, self.l2, self.data_radius, Some(bound))
    }

    fn certify(
        kind: LossKind,
        dimension: usize,
        l2: f64,
        data_radius: f64,
        minimizer_norm_bound: Option<f64>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(l2.is_finite() && l2 >= 0.0) {
            return Err(invalid(format!("lambda must be finite and >= 0, got {l2}")));
        }
        if !(data_radius.is_finite() && data_radius > 0.0) {
            return Err(invalid(format!("data_radius must be positive, got {data_radius}")));
        }
        if let Some(b) = minimizer_norm_bound {
            if !(b.is_finite() && b > 0.0) {
                return Err(invalid(format!("B must be positive, got {b}")));
            }
        }
        let r = data_radius;
        let (strong_convexity, domain_radius, lipschitz, hessian_lipschitz, smoothness) =
            match kind {
                LossKind::MeanSquared => {
                    // minimizer is 2·mean/(2 + l2), inside the data ball
                    let radius = r;
                    (2.0 + l2, radius, 2.0 * (radius + r) + l2 * radius, 0.0, 2.0 + l2)
                }
                LossKind::RidgeRegression => {
                    let radius = if l2 > 0.0 {
                        // (l2/2)‖ŵ‖² <= F̂(ŵ) <= F̂(0) <= r²
                        r * (2.0 / l2).sqrt()
                    } else {
                        minimizer_norm_bound.ok_or(UnlearnError::MissingMinimizerBound)?
                    };
                    let lip = 2.0 * r * (r * radius + r) + l2 * radius;
                    (l2, radius, lip, 0.0, 2.0 * r * r + l2)
                }
                LossKind::RegularizedLogistic => {
                    // the data term is r-Lipschitz everywhere, so ‖ŵ‖ <= r / l2
                    let (radius, lip) = if l2 > 0.0 {
                        (r / l2, 2.0 * r)
                    } else {
                        (f64::INFINITY, r)
                    };
                    let m = r.powi(3) * SIGMOID_SECOND_DERIVATIVE_MAX;
                    (l2, radius, lip, m, 0.25 * r * r + l2)
                }
            };
        Ok(LossModel {
            kind,
            dimension,
            l2,
            data_radius,
            minimizer_norm_bound,
            lipschitz,
            strong_convexity,
            hessian_lipschitz,
            smoothness,
            domain_radius,
        })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }
    pub fn dimension(&self) -> usize {
        self.dimension
    }
    /// Coefficient of the explicit `(l2/2)‖w‖²` term.
    pub fn l2(&self) -> f64 {
        self.l2
    }
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    pub fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }
    pub fn hessian_lipschitz(&self) -> f64 {
        self.hessian_lipschitz
    }
    /// Upper bound on the largest Hessian eigenvalue over admissible data.
    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }
    pub fn minimizer_norm_bound(&self) -> Option<f64> {
        self.minimizer_norm_bound
    }
    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }
    pub fn data_radius(&self) -> f64 {
        self.data_radius
    }

    pub fn fingerprint(&self) -> LossFingerprint {
        LossFingerprint {
            kind: self.kind,
            d: self.dimension,
            lipschitz: self.lipschitz,
            lambda: self.strong_convexity,
            hessian_lipschitz: self.hessian_lipschitz,
            minimizer_norm_bound: self.minimizer_norm_bound,
            data_radius: self.data_radius,
        }
    }

    /// Returns `f + (lambda/2)‖w‖²` with its constants re-certified.
    pub fn regularize(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid(format!("regularization must be positive, got {lambda}")));
        }
        Self::certify(
            self.kind,
            self.dimension,
            self.l2 + lambda,
            self.data_radius,
            self.minimizer_norm_bound,
        )
    }

    /// Full admissibility check, including the data-radius constraint.
    pub fn check_instance(&self, z: &Instance) -> Result<()> {
        self.check_shape(z)?;
        let limit = self.data_radius * (1.0 + RADIUS_SLACK);
        let norm = z.features().norm();
        if norm > limit {
            return Err(UnlearnError::Inadmissible {
                norm,
                radius: self.data_radius,
            });
        }
        if let (LossKind::RidgeRegression, Some(y)) = (self.kind, z.label()) {
            if y.abs() > limit {
                return Err(UnlearnError::Inadmissible {
                    norm: y.abs(),
                    radius: self.data_radius,
                });
            }
        }
        Ok(())
    }

    fn check_shape(&self, z: &Instance) -> Result<()> {
        match (self.kind, z) {
            (LossKind::MeanSquared, Instance::Point(_)) => {}
            (LossKind::RidgeRegression, Instance::Labeled { y, .. }) => {
                if !y.is_finite() {
                    return Err(invalid("label must be finite"));
                }
            }
            (LossKind::RegularizedLogistic, Instance::Labeled { y, .. }) => {
                if *y != 1.0 && *y != -1.0 {
                    return Err(UnlearnError::InvalidLabel(*y));
                }
            }
            (kind, _) => return Err(UnlearnError::WrongInstanceKind(kind.name())),
        }
        if z.dimension() != self.dimension {
            return Err(UnlearnError::DimensionMismatch {
                expected: self.dimension,
                found: z.dimension(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_point(&self, w: &Vector) -> Result<()> {
        if w.len() != self.dimension {
            return Err(UnlearnError::DimensionMismatch {
                expected: self.dimension,
                found: w.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, w: &Vector, z: &Instance) -> Result<f64> {
        self.check_point(w)?;
        self.check_shape(z)?;
        Ok(self.data_value(w, z) + 0.5 * self.l2 * w.norm_squared())
    }

    pub fn gradient(&self, w: &Vector, z: &Instance) -> Result<Vector> {
        self.check_point(w)?;
        self.check_shape(z)?;
        let mut g = w * self.l2;
        self.add_data_gradient(w, z, 1.0, &mut g);
        Ok(g)
    }

    pub fn hessian(&self, w: &Vector, z: &Instance) -> Result<Matrix> {
        self.check_point(w)?;
        self.check_shape(z)?;
        let mut h = Matrix::identity(self.dimension, self.dimension) * self.l2;
        self.add_data_hessian(w, z, 1.0, &mut h);
        Ok(h)
    }

    /// Loss of the data term alone; shapes are assumed checked.
    pub(crate) fn data_value(&self, w: &Vector, z: &Instance) -> f64 {
        match (self.kind, z) {
            (LossKind::MeanSquared, Instance::Point(p)) => (w - p).norm_squared(),
            (LossKind::RidgeRegression, Instance::Labeled { x, y }) => {
                let r = w.dot(x) - y;
                r * r
            }
            (LossKind::RegularizedLogistic, Instance::Labeled { x, y }) => softplus(-y * w.dot(x)),
            _ => unreachable!("instance shape checked by caller"),
        }
    }

    /// `out += scale · ∇(data term)`.
    pub(crate) fn add_data_gradient(&self, w: &Vector, z: &Instance, scale: f64, out: &mut Vector) {
        match (self.kind, z) {
            (LossKind::MeanSquared, Instance::Point(p)) => {
                out.axpy(2.0 * scale, w, 1.0);
                out.axpy(-2.0 * scale, p, 1.0);
            }
            (LossKind::RidgeRegression, Instance::Labeled { x, y }) => {
                let r = w.dot(x) - y;
                out.axpy(2.0 * r * scale, x, 1.0);
            }
            (LossKind::RegularizedLogistic, Instance::Labeled { x, y }) => {
                let s = sigmoid(-y * w.dot(x));
                out.axpy(-y * s * scale, x, 1.0);
            }
            _ => unreachable!("instance shape checked by caller"),
        }
    }

    /// `out += scale · ∇²(data term)`.
    pub(crate) fn add_data_hessian(&self, w: &Vector, z: &Instance, scale: f64, out: &mut Matrix) {
        match (self.kind, z) {
            (LossKind::MeanSquared, Instance::Point(_)) => {
                for i in 0..self.dimension {
                    out[(i, i)] += 2.0 * scale;
                }
            }
            (LossKind::RidgeRegression, Instance::Labeled { x, .. }) => {
                add_outer(out, 2.0 * scale, x);
            }
            (LossKind::RegularizedLogistic, Instance::Labeled { x, .. }) => {
                let s = sigmoid(w.dot(x));
                add_outer(out, s * (1.0 - s) * scale, x);
            }
            _ => unreachable!("instance shape checked by caller"),
        }
    }
}

/// `ln(1 + e^t)` without overflow.
/// `out += c · x xᵀ`, bitwise symmetric because `x[i]·x[j]` commutes.
fn add_outer(out: &mut Matrix, c: f64, x: &Vector) {
    let d = x.len();
    for j in 0..d {
        for i in 0..d {
            out[(i, j)] += c * (x[i] * x[j]);
        }
    }
}

pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}
