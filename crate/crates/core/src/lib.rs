// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Certified batch deletion for convex empirical risk minimization.
//!
//! A model trained with [`unlearn::learn_sc`] keeps only its minimizer and
//! the empirical Hessian at that minimizer, an `O(d²)` statistic. Deleting a
//! batch of training points costs one Newton step plus Gaussian noise scaled
//! to the step's worst-case error, see [`unlearn::unlearn_sc`]. The
//! [`audit`] module checks every bound against retraining from scratch.
//!
//! Data-parallel loops use rayon when the `parallel` feature is enabled
//! (the default); results are bitwise identical either way.

pub mod audit;
pub mod capacity;
pub mod data;
pub mod distribution;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod losses;
pub mod solver;
pub mod unlearn;

pub use data::Dataset;
pub use distribution::Distribution;
pub use error::{ErrorClass, Result, UnlearnError};
pub use exec::Execution;
pub use losses::{Instance, LossFingerprint, LossKind, LossModel, LossSpec, Matrix, Vector};
pub use unlearn::{DeleteRequest, PrivacyBudget, TrainedModel, UnlearnOutput};
