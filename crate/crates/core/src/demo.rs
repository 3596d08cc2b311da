//! The four-state VTOL aircraft example: five agents switching between two
//! directed topologies.

use serde::Deserialize;

use crate::linalg::Matrix;
use crate::synthesis::{AlphaChoice, CouplingChoice, ReferenceValues, SynthesisParams};
use crate::topology::{DirectedGraph, GraphSet};

pub const SYSTEM_JSON: &str = include_str!("../data/vtol/system.json");
pub const G1_JSON: &str = include_str!("../data/vtol/g1.json");
pub const G2_JSON: &str = include_str!("../data/vtol/g2.json");

pub const HORIZON: f64 = 10.0;
pub const DT: f64 = 0.01;
pub const SEED: u64 = 20_100_418;

/// Published numbers for the example. These come from a different
/// solver and are compared against, never substituted for, computed values.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub k: Matrix,
    pub reduced_laplacians: Vec<Matrix>,
    pub c: Vec<f64>,
    pub beta: f64,
    pub alpha: f64,
    pub alpha_min: f64,
    pub lambda_bar_max: f64,
    pub dwell_threshold: f64,
    pub switching_dwell: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    a: Matrix,
    b: Matrix,
    reference: Reference,
}

#[derive(Debug, Clone)]
pub struct Vtol {
    pub a: Matrix,
    pub b: Matrix,
    pub graphs: GraphSet,
    pub reference: Reference,
}

impl Vtol {
    pub fn load() -> Self {
        let doc: SystemDoc = serde_json::from_str(SYSTEM_JSON).expect("bundled system data parses");
        let graphs = [G1_JSON, G2_JSON]
            .iter()
            .map(|s| DirectedGraph::from_json(s).expect("bundled graph parses"))
            .collect();
        Self {
            a: doc.a,
            b: doc.b,
            graphs: GraphSet::new(graphs).expect("bundled graphs share nodes"),
            reference: doc.reference,
        }
    }

    pub fn agents(&self) -> usize {
        self.graphs.node_count()
    }

    /// `β = 3`, `c₁ = c₂ = 0.25`, `α = 8.1`.
    pub fn params(&self) -> SynthesisParams {
        SynthesisParams {
            beta: self.reference.beta,
            coupling: CouplingChoice::Values(self.reference.c.clone()),
            alpha: AlphaChoice::Value(self.reference.alpha),
        }
    }

    pub fn reference_values(&self) -> ReferenceValues {
        let r = &self.reference;
        ReferenceValues {
            k: r.k.clone(),
            c: r.c.clone(),
            beta: r.beta,
            alpha: r.alpha,
            alpha_min: r.alpha_min,
            lambda_bar_max: r.lambda_bar_max,
            dwell_threshold: r.dwell_threshold,
            switching_dwell: r.switching_dwell,
            note: "published values from an unspecified LMI solver; P, Q, K, λ̄_max and τ* are not unique, so computed values differ".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::synthesize;
    use crate::topology::reduced_laplacian;

    #[test]
    fn bundled_graphs_reduce_to_reference() {
        let v = Vtol::load();
        assert_eq!(v.agents(), 5);
        for (g, expect) in v
            .graphs
            .graphs()
            .iter()
            .zip(&v.reference.reduced_laplacians)
        {
            assert_eq!(&reduced_laplacian(g).unwrap().matrix, expect);
        }
        assert_eq!(v.graphs.graphs()[0].spanning_tree_root(), Some(0));
        assert_eq!(v.graphs.graphs()[1].spanning_tree_root(), Some(1));
    }

    #[test]
    fn synthesis_runs() {
        let v = Vtol::load();
        let d = synthesize(&v.a, &v.b, &v.graphs, &v.params()).unwrap();
        assert_eq!(d.alpha_min, 8.0);
        assert!(d.gain_lmi_max_eigenvalue < -1e-6);
        assert!(d.dwell_threshold.is_finite() && d.dwell_threshold > 0.0);
        println!(
            "λ̄ = {}, τ* = {}, K = {:?}",
            d.lambda_bar_max, d.dwell_threshold, d.k
        );
    }
}
