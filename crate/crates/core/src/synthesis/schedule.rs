use serde::{Deserialize, Serialize};

use super::{SynthesisError, TopologyCertificate};
use crate::linalg::max_generalized_eigenvalue;
use crate::topology::SwitchingSignal;

/// Margin of one switch `t_{k+1}` in the per-switch dwell condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMargin {
    /// 1-based interval number.
    pub k: usize,
    pub start: f64,
    pub end: f64,
    /// 1-based topology active on the interval.
    pub from: usize,
    /// 1-based topology active after the switch.
    pub to: usize,
    pub lambda_bar: f64,
    /// `β (t_{k+1} − t_k) − ln λ̄⁽ᵏ⁾`.
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub beta: f64,
    pub kappa0: f64,
    pub intervals: Vec<IntervalMargin>,
    pub passed: bool,
}

impl ScheduleReport {
    pub fn min_margin(&self) -> Option<f64> {
        self.intervals.iter().map(|m| m.margin).reduce(f64::min)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IntervalMargin> {
        self.intervals.iter().filter(|m| !m.passed)
    }
}

/// Evaluates `β (t_{k+1} − t_k) − ln λ̄⁽ᵏ⁾ > κ₀` at every switch of `s`.
///
/// The trailing interval cut off by the horizon has no successor and is
/// not checked.
pub fn check_schedule(
    s: &SwitchingSignal,
    certs: &[TopologyCertificate],
    beta: f64,
    kappa0: f64,
) -> Result<ScheduleReport, SynthesisError> {
    s.check_indices(certs.len())?;
    let intervals: Vec<_> = s.intervals().collect();
    let mut out = Vec::with_capacity(intervals.len().saturating_sub(1));
    for (k, pair) in intervals.windows(2).enumerate() {
        let (cur, next) = (pair[0], pair[1]);
        let lambda_bar = if cur.topology == next.topology {
            1.0
        } else {
            max_generalized_eigenvalue(&certs[cur.topology].q, &certs[next.topology].q)?
        };
        let margin = beta * cur.len() - lambda_bar.ln();
        out.push(IntervalMargin {
            k: k + 1,
            start: cur.start,
            end: cur.end,
            from: cur.topology + 1,
            to: next.topology + 1,
            lambda_bar,
            margin,
            passed: margin > kappa0,
        });
    }
    let passed = out.iter().all(|m| m.passed);
    Ok(ScheduleReport {
        beta,
        kappa0,
        intervals: out,
        passed,
    })
}
