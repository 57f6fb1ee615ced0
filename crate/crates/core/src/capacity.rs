// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Deletion-capacity formulas.
//!
//! Both capacities are reported up to a loss-dependent constant `c`, which
//! callers pass explicitly (1 by default). Fourth roots are taken as two
//! square roots so that scaling `d` by 16 scales the result by exactly 1/2.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityInputs {
    pub d: usize,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub c_unlearn: f64,
    pub c_dp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityReport {
    pub m_unlearn: f64,
    pub m_dp: f64,
    pub ratio: f64,
    pub inputs: CapacityInputs,
}

fn check(d: usize, n: usize, epsilon: f64, delta: f64, c: f64) -> Result<()> {
    if d == 0 || n == 0 {
        return Err(invalid("d and n must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("constant must be positive, got {c}")));
    }
    Ok(())
}

/// `c · n √ε / (d ln(1/δ))^{1/4}` for the Newton-step mechanism.
pub fn capacity_unlearn(d: usize, n: usize, epsilon: f64, delta: f64, c: f64) -> Result<f64> {
    check(d, n, epsilon, delta, c)?;
    let q = d as f64 * (1.0 / delta).ln();
    Ok(c * n as f64 * epsilon.sqrt() / q.sqrt().sqrt())
}

/// `c · n ε / √(d ln(e^ε/δ))` for unlearning through group differential privacy.
pub fn capacity_dp(d: usize, n: usize, epsilon: f64, delta: f64, c: f64) -> Result<f64> {
    check(d, n, epsilon, delta, c)?;
    let q = d as f64 * (epsilon - delta.ln());
    Ok(c * n as f64 * epsilon / q.sqrt())
}

/// `capacity_unlearn / capacity_dp` with both constants set to 1.
pub fn separation_ratio(d: usize, n: usize, epsilon: f64, delta: f64) -> Result<f64> {
    Ok(capacity_unlearn(d, n, epsilon, delta, 1.0)? / capacity_dp(d, n, epsilon, delta, 1.0)?)
}

pub fn capacity_report(inputs: CapacityInputs) -> Result<CapacityReport> {
    let CapacityInputs {
        d,
        n,
        epsilon,
        delta,
        c_unlearn,
        c_dp,
    } = inputs;
    let m_unlearn = capacity_unlearn(d, n, epsilon, delta, c_unlearn)?;
    let m_dp = capacity_dp(d, n, epsilon, delta, c_dp)?;
    Ok(CapacityReport {
        m_unlearn,
        m_dp,
        ratio: m_unlearn / m_dp,
        inputs,
    })
}

/// True when `n <= √d / ε`, where an unlearner that ignores the delete
/// request cannot remove even one sample.
pub fn dp_lower_bound_regime(d: usize, n: usize, epsilon: f64) -> bool {
    (n as f64) <= (d as f64).sqrt() / epsilon
}
