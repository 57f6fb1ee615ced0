// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use newton_unlearn::{Dataset, DeleteRequest, Instance, LossKind, LossModel, Matrix, Vector};
use rand::seq::index;
use rand::Rng;

/// Uniform in the cube of half-width `r/√d`, so inside the radius-`r` ball.
pub fn in_ball<R: Rng>(rng: &mut R, d: usize, r: f64) -> Vector {
    let h = r / (d as f64).sqrt();
    Vector::from_fn(d, |_, _| h * (2.0 * rng.random::<f64>() - 1.0))
}

/// An admissible instance for `loss`.
pub fn instance<R: Rng>(rng: &mut R, loss: &LossModel) -> Instance {
    let (d, r) = (loss.dimension(), loss.data_radius());
    let x = in_ball(rng, d, r);
    match loss.kind() {
        LossKind::MeanSquared => Instance::Point(x),
        LossKind::RidgeRegression => Instance::Labeled {
            x,
            y: r * (2.0 * rng.random::<f64>() - 1.0),
        },
        LossKind::RegularizedLogistic => Instance::Labeled {
            x,
            y: if rng.random_bool(0.5) { 1.0 } else { -1.0 },
        },
    }
}

pub fn dataset<R: Rng>(rng: &mut R, loss: &LossModel, n: usize) -> Dataset {
    Dataset::new((0..n).map(|_| instance(rng, loss)).collect()).unwrap()
}

pub fn subset<R: Rng>(rng: &mut R, data: &Dataset, m: usize) -> DeleteRequest {
    let picked = index::sample(rng, data.len(), m);
    DeleteRequest::new(picked.iter().map(|i| data[i].clone()).collect())
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm(h: &Matrix) -> f64 {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
}

pub fn min_eig(h: &Matrix) -> f64 {
    h.clone().symmetric_eigenvalues().min()
}

pub fn max_eig(h: &Matrix) -> f64 {
    h.clone().symmetric_eigenvalues().max()
}
