// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic data distributions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::losses::{sigmoid, Instance, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Distribution {
    /// Scalar points in `{0, 1}` with `P(1) = p`.
    Bernoulli { p: f64 },
    /// Scalar points uniform on `[a, b]`.
    UniformInterval { a: f64, b: f64 },
    /// Features in the unit ball, `P(y = +1 | x) = s(margin · ⟨1/√d, x⟩)`.
    GaussianLogistic { d: usize, margin: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Bernoulli { p } if !(0.0..=1.0).contains(&p) => {
                Err(invalid(format!("bernoulli p must lie in [0, 1], got {p}")))
            }
            Distribution::UniformInterval { a, b } if !(a < b && a.is_finite() && b.is_finite()) => {
                Err(invalid(format!("uniform interval needs a < b, got [{a}, {b}]")))
            }
            Distribution::GaussianLogistic { d, margin } if d == 0 || !margin.is_finite() => {
                Err(invalid("gaussian-logistic needs d >= 1 and a finite margin"))
            }
            _ => Ok(()),
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            Distribution::GaussianLogistic { d, .. } => d,
            _ => 1,
        }
    }

    /// Radius of the ball containing every sample (features and labels).
    pub fn data_radius(&self) -> f64 {
        match *self {
            Distribution::Bernoulli { .. } | Distribution::GaussianLogistic { .. } => 1.0,
            Distribution::UniformInterval { a, b } => a.abs().max(b.abs()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Instance {
        match *self {
            Distribution::Bernoulli { p } => {
                Instance::point([if rng.random::<f64>() < p { 1.0 } else { 0.0 }])
            }
            Distribution::UniformInterval { a, b } => {
                Instance::point([a + (b - a) * rng.random::<f64>()])
            }
            Distribution::GaussianLogistic { d, margin } => {
                let scale = 1.0 / (d as f64).sqrt();
                let mut x = Vector::from_iterator(
                    d,
                    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) * scale),
                );
                let norm = x.norm();
                if norm > 1.0 {
                    x /= norm;
                }
                let score = margin * x.sum() * scale;
                let y = if rng.random::<f64>() < sigmoid(score) { 1.0 } else { -1.0 };
                Instance::Labeled { x, y }
            }
        }
    }

    pub fn sample_n(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Dataset::new((0..n).map(|_| self.sample(&mut rng)).collect())
    }

    /// Probability density (or mass, for Bernoulli) at `z`, when evaluable.
    pub fn density(&self, z: &Instance) -> Option<f64> {
        let v = match z {
            Instance::Point(p) if p.len() == 1 => p[0],
            _ => return None,
        };
        match *self {
            Distribution::Bernoulli { p } => Some(if v == 1.0 {
                p
            } else if v == 0.0 {
                1.0 - p
            } else {
                0.0
            }),
            Distribution::UniformInterval { a, b } => {
                Some(if (a..=b).contains(&v) { 1.0 / (b - a) } else { 0.0 })
            }
            Distribution::GaussianLogistic { .. } => None,
        }
    }

    /// `(w*, F*)` for the squared-distance loss `‖w − z‖²`: the mean and the variance.
    pub fn mean_estimation_optimum(&self) -> Option<(Vector, f64)> {
        match *self {
            Distribution::Bernoulli { p } => Some((Vector::from_element(1, p), p * (1.0 - p))),
            Distribution::UniformInterval { a, b } => {
                Some((Vector::from_element(1, 0.5 * (a + b)), (b - a).powi(2) / 12.0))
            }
            Distribution::GaussianLogistic { .. } => None,
        }
    }
}

/// Two uniform distributions of width 1/2 whose densities differ by `l1` in L1.
///
/// Returns `(D₁, D₂)` with `D₂ = U[0.25, 0.75]` and `D₁` shifted right by
/// `l1/4`, so the mean gap is `l1/4` and `∫[D₁ − D₂]₊ = l1/2`.
pub fn hypothesis_pair(l1: f64) -> Result<(Distribution, Distribution)> {
    if !(l1 > 0.0 && l1 <= 2.0) {
        return Err(invalid(format!("L1 distance must lie in (0, 2], got {l1}")));
    }
    let shift = l1 / 4.0;
    Ok((
        Distribution::UniformInterval {
            a: 0.25 + shift,
            b: 0.75 + shift,
        },
        Distribution::UniformInterval { a: 0.25, b: 0.75 },
    ))
}

/// `‖U[a₁,b₁] − U[a₂,b₂]‖₁`, computed from the overlap.
pub fn uniform_l1_distance(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let (h1, h2) = (1.0 / (b1 - a1), 1.0 / (b2 - a2));
    let lo = a1.max(a2);
    let hi = b1.min(b2);
    let overlap = (hi - lo).max(0.0);
    // mass outside the overlap plus the density gap inside it
    (1.0 - h1 * overlap) + (1.0 - h2 * overlap) + (h1 - h2).abs() * overlap
}
