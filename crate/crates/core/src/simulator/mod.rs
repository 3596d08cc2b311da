//! Exact simulation of the switched closed loop
//! `ẋ = (I_N ⊗ A − α L⁽σ⁽ᵗ⁾⁾ ⊗ BK) x` and of its disagreement dynamics.

mod csv;
mod metrics;
mod propagate;
mod sweep;

pub use csv::write_csv;
pub use metrics::{
    consensus_verdict, disagreement, lyapunov_monitor, ConsensusVerdict, IntervalDecay, JumpRecord,
    MonitorReport,
};
pub use propagate::{
    rk4_propagate, simulate, simulate_reduced, ReducedTrajectory, TrajectoryRecord,
};
pub use sweep::{random_initial_state, sweep, sweep_seq, SweepOutcome};

use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};
use crate::topology::{self, xi, GraphSet, SwitchingSignal, TopologyError};

/// Tolerance on `(Ξ⊗I)M − M̂(Ξ⊗I)` relative to the largest entry of `M`.
pub const INTERTWINING_TOL: f64 = 1e-10;
/// Propagation aborts once `‖x‖` exceeds this.
pub const DIVERGENCE_CUTOFF: f64 = 1e12;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid simulation parameter: {0}")]
    Parameter(String),
    #[error("reduced dynamics do not intertwine with the full system (residual {0:e})")]
    Intertwining(f64),
    #[error("state norm {norm:e} exceeded the divergence cutoff at t = {t}")]
    Divergence { t: f64, norm: f64 },
    #[error("Lyapunov monitor: {0}")]
    Monitor(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Per-topology full and reduced closed-loop matrices plus the schedule.
#[derive(Debug, Clone)]
pub struct SwitchedClosedLoop {
    agents: usize,
    state_dim: usize,
    full: Vec<Matrix>,
    reduced: Vec<Matrix>,
    signal: SwitchingSignal,
    intertwining_residual: f64,
}

impl SwitchedClosedLoop {
    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn full(&self) -> &[Matrix] {
        &self.full
    }

    pub fn reduced(&self) -> &[Matrix] {
        &self.reduced
    }

    pub fn signal(&self) -> &SwitchingSignal {
        &self.signal
    }

    pub fn topology_count(&self) -> usize {
        self.full.len()
    }

    /// Largest intertwining residual over all topologies.
    pub fn intertwining_residual(&self) -> f64 {
        self.intertwining_residual
    }

    /// Same matrices under a different schedule.
    pub fn with_signal(&self, signal: SwitchingSignal) -> Result<Self, SimError> {
        signal.check_indices(self.full.len())?;
        Ok(Self {
            signal,
            ..self.clone()
        })
    }
}

pub fn build_closed_loop(
    a: &Matrix,
    b: &Matrix,
    k: &Matrix,
    alpha: f64,
    graphs: &GraphSet,
    signal: &SwitchingSignal,
) -> Result<SwitchedClosedLoop, SimError> {
    let n = a.require_square("A")?;
    if b.rows() != n {
        return Err(SimError::Dimension(format!(
            "B has {} rows, A is {n}×{n}",
            b.rows()
        )));
    }
    if k.rows() != b.cols() || k.cols() != n {
        return Err(SimError::Dimension(format!(
            "K is {}×{}, expected {}×{n}",
            k.rows(),
            k.cols(),
            b.cols()
        )));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(SimError::Parameter(format!(
            "α must be non-negative, got {alpha}"
        )));
    }
    signal.check_indices(graphs.len())?;
    let agents = graphs.node_count();
    if agents < 2 {
        return Err(SimError::Dimension("need at least two agents".into()));
    }
    let bk = b * k;
    let drift_full = Matrix::identity(agents).kron(a);
    let drift_red = Matrix::identity(agents - 1).kron(a);
    let xi_n = xi(agents).kron(&Matrix::identity(n));
    let mut full = Vec::with_capacity(graphs.len());
    let mut reduced = Vec::with_capacity(graphs.len());
    let mut worst: f64 = 0.0;
    for g in graphs.graphs() {
        let l = g.laplacian();
        let lhat = topology::reduce(&l)?.matrix;
        let m = &drift_full - &l.kron(&bk).scale(alpha);
        let mh = &drift_red - &lhat.kron(&bk).scale(alpha);
        let lhs = &xi_n * &m;
        let rhs = &mh * &xi_n;
        let residual = lhs.max_diff(&rhs) / (1.0 + m.max_abs());
        if residual > INTERTWINING_TOL {
            return Err(SimError::Intertwining(residual));
        }
        worst = worst.max(residual);
        full.push(m);
        reduced.push(mh);
    }
    Ok(SwitchedClosedLoop {
        agents,
        state_dim: n,
        full,
        reduced,
        signal: signal.clone(),
        intertwining_residual: worst,
    })
}
