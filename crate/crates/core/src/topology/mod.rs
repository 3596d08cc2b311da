//! Communication topologies: directed graphs, their Laplacians, the
//! disagreement reduction `Ξ L Π`, and switching signals.

mod graph;
mod reduced;
mod switching;

pub use graph::{DirectedGraph, EdgeDoc, GraphDoc, GraphSet};
pub use reduced::{pi, reduce, xi, ReducedLaplacian, LAPLACIAN_ROW_SUM_TOL};
pub use switching::{Interval, SignalDoc, SwitchingSignal};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("not a Laplacian: row {row} sums to {sum:e}")]
    NotLaplacian { row: usize, sum: f64 },
    #[error("invalid switching signal: {0}")]
    Signal(String),
    #[error("malformed graph document: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Laplacian of `g` reduced to the disagreement coordinates.
pub fn reduced_laplacian(g: &DirectedGraph) -> Result<ReducedLaplacian, TopologyError> {
    reduce(&g.laplacian())
}
