use serde::{Deserialize, Serialize};

use super::{SimError, TrajectoryRecord};
use crate::linalg::{inverse, max_generalized_eigenvalue, Matrix};
use crate::synthesis::TopologyCertificate;

/// `e_i = x_i − x_N` stacked blockwise, and `‖e‖₂`.
pub fn disagreement(x: &[f64], agents: usize, n: usize) -> Result<(Vec<f64>, f64), SimError> {
    if agents < 2 || x.len() != agents * n {
        return Err(SimError::Dimension(format!(
            "state of length {} does not split into {agents} blocks of {n}",
            x.len()
        )));
    }
    let last = &x[(agents - 1) * n..];
    let mut e = Vec::with_capacity((agents - 1) * n);
    for i in 0..agents - 1 {
        e.extend(x[i * n..(i + 1) * n].iter().zip(last).map(|(a, b)| a - b));
    }
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((e, norm))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusVerdict {
    pub passed: bool,
    /// `‖e(T)‖ / ‖e(0)‖`, zero when `e(0) = 0`.
    pub ratio: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub tolerance: f64,
    pub window: f64,
    /// Peak of `‖e‖` over `(T − w, T]`.
    pub peak_last_window: f64,
    /// Peak of `‖e‖` over `(T − 2w, T − w]`.
    pub peak_previous_window: f64,
    /// Largest distance between any two agents' states at `T`.
    pub max_pairwise_distance: f64,
    /// Agent average at `T`; reported only.
    pub final_mean: Vec<f64>,
}

/// Finite-horizon consensus test: `‖e(T)‖ ≤ tol·‖e(0)‖` and the peak
/// disagreement over the final window is below the peak one window
/// earlier. A window longer than half the horizon is clamped to `T/2`.
pub fn consensus_verdict(tr: &TrajectoryRecord, tol: f64, window: f64) -> ConsensusVerdict {
    let n = tr.state_dim;
    let x_final = tr.final_state();
    let mut final_mean = vec![0.0; n];
    for i in 0..tr.agents {
        for (m, v) in final_mean.iter_mut().zip(&x_final[i * n..(i + 1) * n]) {
            *m += v / tr.agents as f64;
        }
    }
    let mut max_pairwise_distance: f64 = 0.0;
    for i in 0..tr.agents {
        for j in i + 1..tr.agents {
            let d = (0..n)
                .map(|c| (x_final[i * n + c] - x_final[j * n + c]).powi(2))
                .sum::<f64>()
                .sqrt();
            max_pairwise_distance = max_pairwise_distance.max(d);
        }
    }

    let initial_norm = tr.disagreement_norm[0];
    let final_norm = *tr.disagreement_norm.last().unwrap();
    let horizon = *tr.times.last().unwrap();
    let w = window.min(horizon / 2.0);
    let peak = |lo: f64, hi: f64| {
        tr.times
            .iter()
            .zip(&tr.disagreement_norm)
            .filter(|(t, _)| **t > lo && **t <= hi)
            .map(|(_, e)| *e)
            .fold(0.0, f64::max)
    };
    let peak_last_window = peak(horizon - w, horizon);
    let peak_previous_window = peak(horizon - 2.0 * w, horizon - w);
    let (ratio, passed) = if initial_norm == 0.0 {
        (0.0, true)
    } else {
        let ratio = final_norm / initial_norm;
        let decaying = peak_last_window < peak_previous_window || peak_last_window == 0.0;
        (ratio, ratio <= tol && decaying)
    };
    ConsensusVerdict {
        passed,
        ratio,
        initial_norm,
        final_norm,
        tolerance: tol,
        window: w,
        peak_last_window,
        peak_previous_window,
        max_pairwise_distance,
        final_mean,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub t: f64,
    /// 1-based topologies.
    pub from: usize,
    pub to: usize,
    /// `V_to(t) / V_from(t⁻)`; `None` when `V_from(t⁻) = 0`.
    pub ratio: Option<f64>,
    /// Largest eigenvalue of `Q_from⁻¹ Q_to`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalDecay {
    pub start: f64,
    pub end: f64,
    /// 1-based topology.
    pub topology: usize,
    /// `−ln(V(end⁻) / V(start)) / (end − start)`; `None` if either is 0.
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    /// `values[s][i] = V_i` at sample `s`.
    pub values: Vec<Vec<f64>>,
    pub jumps: Vec<JumpRecord>,
    pub decay: Vec<IntervalDecay>,
}

/// `eᵀ (Q ⊗ P⁻¹) e` with `e` split into blocks of `pinv.rows()`.
fn quadratic(e: &[f64], q: &Matrix, pinv: &Matrix) -> f64 {
    let n = pinv.rows();
    let blocks: Vec<&[f64]> = e.chunks(n).collect();
    let weighted: Vec<Vec<f64>> = blocks.iter().map(|b| pinv.matvec(b)).collect();
    let mut v = 0.0;
    for (j, bj) in blocks.iter().enumerate() {
        for (k, wk) in weighted.iter().enumerate() {
            let dot: f64 = bj.iter().zip(wk).map(|(a, b)| a * b).sum();
            v += q[(j, k)] * dot;
        }
    }
    v
}

/// Evaluates `V_i(t) = e(t)ᵀ(Q⁽ⁱ⁾ ⊗ P⁻¹)e(t)` for every topology and sample.
///
/// Jump ratios at switches never exceed the generalized-eigenvalue bound;
/// a violation is an error.
pub fn lyapunov_monitor(
    tr: &TrajectoryRecord,
    certs: &[TopologyCertificate],
    p: &Matrix,
) -> Result<MonitorReport, SimError> {
    let needed = tr.topology.iter().max().map_or(0, |m| m + 1);
    if certs.len() < needed {
        return Err(SimError::Monitor(format!(
            "trajectory uses topology {needed} but only {} certificates given",
            certs.len()
        )));
    }
    if p.rows() != tr.state_dim || certs.iter().any(|c| c.q.rows() != tr.agents - 1) {
        return Err(SimError::Dimension(
            "certificate sizes do not match the trajectory".into(),
        ));
    }
    let pinv = inverse(p)?;
    let values: Vec<Vec<f64>> = tr
        .disagreement
        .iter()
        .map(|e| certs.iter().map(|c| quadratic(e, &c.q, &pinv)).collect())
        .collect();

    let mut jumps = Vec::new();
    let mut decay = Vec::new();
    let mut seg_start = 0usize;
    let last = tr.len() - 1;
    for s in 1..=last {
        let is_switch = tr.times[s] == tr.times[s - 1];
        if is_switch || s == last {
            let seg_end = if is_switch { s - 1 } else { s };
            let topo = tr.topology[seg_start];
            let (v0, v1) = (values[seg_start][topo], values[seg_end][topo]);
            let len = tr.times[seg_end] - tr.times[seg_start];
            decay.push(IntervalDecay {
                start: tr.times[seg_start],
                end: tr.times[seg_end],
                topology: topo + 1,
                exponent: (v0 > 0.0 && v1 > 0.0 && len > 0.0).then(|| -(v1 / v0).ln() / len),
            });
            seg_start = s;
        }
        if is_switch {
            let (from, to) = (tr.topology[s - 1], tr.topology[s]);
            let bound = if from == to {
                1.0
            } else {
                max_generalized_eigenvalue(&certs[from].q, &certs[to].q)?
            };
            let before = values[s - 1][from];
            let ratio = (before > 0.0).then(|| values[s][to] / before);
            if let Some(r) = ratio {
                if r > bound * (1.0 + 1e-9) {
                    return Err(SimError::Monitor(format!(
                        "jump ratio {r} at t = {} exceeds bound {bound}",
                        tr.times[s]
                    )));
                }
            }
            jumps.push(JumpRecord {
                t: tr.times[s],
                from: from + 1,
                to: to + 1,
                ratio,
                bound,
            });
        }
    }
    Ok(MonitorReport {
        values,
        jumps,
        decay,
    })
}
