// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, UnlearnError>;

/// Coarse grouping used by front ends to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Input,
    Solver,
    Budget,
}

#[derive(Debug, Error)]
pub enum UnlearnError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("label {0} is not in {{-1, +1}}")]
    InvalidLabel(f64),

    #[error("instance kind does not match loss {0}")]
    WrongInstanceKind(&'static str),

    #[error("instance norm {norm} exceeds certified data radius {radius}")]
    Inadmissible { norm: f64, radius: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("loss is not strongly convex; regularize it first")]
    NotStronglyConvex,

    #[error("loss has no minimizer norm bound B")]
    MissingMinimizerBound,

    #[error(
        "solver stopped after {iterations} iterations with gradient norm {grad_norm:e} > {tol:e}"
    )]
    NotConverged {
        iterations: usize,
        grad_norm: f64,
        tol: f64,
    },

    #[error("matrix is not positive definite enough: min eigenvalue {min_eigenvalue} < {required}")]
    NotPositiveDefinite { min_eigenvalue: f64, required: f64 },

    #[error("{m} deletions exceed budget of {budget}")]
    BudgetExceeded { m: usize, budget: usize },

    #[error("cannot delete {m} of {n} samples")]
    TooManyDeletions { m: usize, n: usize },

    #[error("model fingerprint does not match the supplied loss")]
    FingerprintMismatch,

    #[error("delete request sample {0} does not occur in the dataset")]
    NotInDataset(usize),

    #[error("density of the reference distribution is zero at an observed sample")]
    ZeroDensity,

    #[error("model file: {0}")]
    Format(String),
}

impl UnlearnError {
    pub fn class(&self) -> ErrorClass {
        use UnlearnError::*;
        match self {
            InvalidParameter(_) | NotStronglyConvex | MissingMinimizerBound => ErrorClass::Config,
            NotConverged { .. } | NotPositiveDefinite { .. } => ErrorClass::Solver,
            BudgetExceeded { .. } | TooManyDeletions { .. } => ErrorClass::Budget,
            DimensionMismatch { .. }
            | InvalidLabel(_)
            | WrongInstanceKind(_)
            | Inadmissible { .. }
            | EmptyDataset
            | FingerprintMismatch
            | NotInDataset(_)
            | ZeroDensity
            | Format(_) => ErrorClass::Input,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> UnlearnError {
    UnlearnError::InvalidParameter(msg.into())
}
