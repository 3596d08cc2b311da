use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::metrics::disagreement;
use super::{SimError, SwitchedClosedLoop, DIVERGENCE_CUTOFF};
use crate::linalg::{expm, Matrix};
use crate::par;
use crate::topology::SwitchingSignal;

/// Sampled run of the full system.
///
/// Samples lie on the `dt` grid plus every breakpoint. A breakpoint appears
/// twice: first as the left limit with the outgoing topology, then as the
/// right limit with the incoming one (same `t`, same `x`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub agents: usize,
    pub state_dim: usize,
    pub times: Vec<f64>,
    /// 0-based active topology per sample.
    pub topology: Vec<usize>,
    pub states: Vec<Vec<f64>>,
    pub disagreement: Vec<Vec<f64>>,
    pub disagreement_norm: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has samples")
    }
}

/// Sampled run of the reduced error system, on the same sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    pub topology: Vec<usize>,
    pub states: Vec<Vec<f64>>,
}

struct Samples {
    times: Vec<f64>,
    topology: Vec<usize>,
    states: Vec<Vec<f64>>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Grid points `j·dt` strictly inside `(start, end)`.
fn interior_grid(start: f64, end: f64, dt: f64) -> impl Iterator<Item = f64> {
    let eps = 1e-9 * dt;
    let first = (start / dt).floor() as u64;
    (first..)
        .map(move |j| j as f64 * dt)
        .skip_while(move |&t| t <= start + eps)
        .take_while(move |&t| t < end - eps)
}

fn propagate(
    mats: &[Matrix],
    signal: &SwitchingSignal,
    x0: &[f64],
    dt: f64,
) -> Result<Samples, SimError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SimError::Parameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let dim = mats[0].rows();
    if x0.len() != dim {
        return Err(SimError::Dimension(format!(
            "initial state has length {}, system dimension is {dim}",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::Parameter("initial state must be finite".into()));
    }
    let used: Vec<usize> = (0..mats.len()).collect();
    let steps: Vec<Matrix> = par::map(&used, |&i| expm(&mats[i].scale(dt)))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let mut partial: HashMap<(usize, u64), Matrix> = HashMap::new();

    let mut out = Samples {
        times: vec![0.0],
        topology: vec![signal.indices()[0]],
        states: vec![x0.to_vec()],
    };
    let mut x = x0.to_vec();
    for (k, iv) in signal.intervals().enumerate() {
        let topo = iv.topology;
        if k > 0 {
            out.times.push(iv.start);
            out.topology.push(topo);
            out.states.push(x.clone());
        }
        let mut t = iv.start;
        let targets = interior_grid(iv.start, iv.end, dt).chain(std::iter::once(iv.end));
        for target in targets {
            let h = target - t;
            let phi = if (h - dt).abs() <= 1e-12 * dt {
                &steps[topo]
            } else {
                match partial.entry((topo, h.to_bits())) {
                    Entry::Occupied(e) => e.into_mut(),
                    Entry::Vacant(e) => e.insert(expm(&mats[topo].scale(h))?),
                }
            };
            x = phi.matvec(&x);
            let nx = norm(&x);
            if !(nx <= DIVERGENCE_CUTOFF) {
                return Err(SimError::Divergence {
                    t: target,
                    norm: nx,
                });
            }
            t = target;
            out.times.push(t);
            out.topology.push(topo);
            out.states.push(x.clone());
        }
    }
    Ok(out)
}

pub fn simulate(
    cl: &SwitchedClosedLoop,
    x0: &[f64],
    dt: f64,
) -> Result<TrajectoryRecord, SimError> {
    let s = propagate(cl.full(), cl.signal(), x0, dt)?;
    let mut dis = Vec::with_capacity(s.states.len());
    let mut norms = Vec::with_capacity(s.states.len());
    for x in &s.states {
        let (e, n) = disagreement(x, cl.agents(), cl.state_dim())?;
        dis.push(e);
        norms.push(n);
    }
    Ok(TrajectoryRecord {
        agents: cl.agents(),
        state_dim: cl.state_dim(),
        times: s.times,
        topology: s.topology,
        states: s.states,
        disagreement: dis,
        disagreement_norm: norms,
    })
}

/// Propagates `ė = M̂⁽σ⁾ e` directly from `e0`.
pub fn simulate_reduced(
    cl: &SwitchedClosedLoop,
    e0: &[f64],
    dt: f64,
) -> Result<ReducedTrajectory, SimError> {
    let s = propagate(cl.reduced(), cl.signal(), e0, dt)?;
    Ok(ReducedTrajectory {
        times: s.times,
        topology: s.topology,
        states: s.states,
    })
}

/// Classical fixed-step fourth-order Runge-Kutta for `ẋ = m x`.
pub fn rk4_propagate(m: &Matrix, x0: &[f64], duration: f64, steps: usize) -> Vec<f64> {
    let h = duration / steps as f64;
    let mut x = x0.to_vec();
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    for _ in 0..steps {
        let k1 = m.matvec(&x);
        let k2 = m.matvec(&axpy(&x, &k1, 0.5 * h));
        let k3 = m.matvec(&axpy(&x, &k2, 0.5 * h));
        let k4 = m.matvec(&axpy(&x, &k3, h));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}
