use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::TopologyError;
use crate::linalg::Matrix;

/// Weighted directed communication graph on `node_count` agents.
///
/// `weight(i, j) > 0` means agent `i` receives information from agent `j`,
/// i.e. the edge `(i, j)` points from `j` to `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    node_count: usize,
    weights: Vec<f64>,
}

/// One edge of the interchange format. Node labels are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// On-disk form of a [`DirectedGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub node_count: usize,
    pub edges: Vec<EdgeDoc>,
}

impl DirectedGraph {
    pub fn empty(node_count: usize) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Invalid(
                "graph needs at least one node".into(),
            ));
        }
        Ok(Self {
            node_count,
            weights: vec![0.0; node_count * node_count],
        })
    }

    /// Builds a graph from `(from, to, weight)` triples with 0-based nodes.
    pub fn from_edges(
        node_count: usize,
        edges: &[(usize, usize, f64)],
    ) -> Result<Self, TopologyError> {
        let mut g = Self::empty(node_count)?;
        for &(from, to, w) in edges {
            g.add_edge(from, to, w)?;
        }
        Ok(g)
    }

    /// Builds a graph from a full adjacency matrix `a_ij`.
    pub fn from_adjacency(adjacency: &Matrix) -> Result<Self, TopologyError> {
        let n = adjacency.rows();
        if adjacency.cols() != n {
            return Err(TopologyError::Invalid(
                "adjacency matrix must be square".into(),
            ));
        }
        let mut g = Self::empty(n)?;
        for i in 0..n {
            for j in 0..n {
                let w = adjacency[(i, j)];
                if i == j && w != 0.0 {
                    return Err(TopologyError::Invalid(format!(
                        "self-loop at node {}",
                        i + 1
                    )));
                }
                if w != 0.0 {
                    g.add_edge(j, i, w)?;
                }
            }
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, from: usize, to: usize, weight: f64) -> Result<(), TopologyError> {
        let n = self.node_count;
        if from >= n || to >= n {
            return Err(TopologyError::Invalid(format!(
                "edge {} -> {} outside node range 1..={n}",
                from + 1,
                to + 1
            )));
        }
        if from == to {
            return Err(TopologyError::Invalid(format!(
                "self-loop at node {}",
                from + 1
            )));
        }
        if !weight.is_finite() || weight <= 0.0 {
            return Err(TopologyError::Invalid(format!(
                "edge {} -> {} has weight {weight}; weights must be positive and finite",
                from + 1,
                to + 1
            )));
        }
        if self.weights[to * n + from] != 0.0 {
            return Err(TopologyError::Invalid(format!(
                "duplicate edge {} -> {}",
                from + 1,
                to + 1
            )));
        }
        self.weights[to * n + from] = weight;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// `a_ij`: weight with which agent `i` listens to agent `j`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.node_count + j]
    }

    /// Edges as `(from, to, weight)`, 0-based, ordered by `(to, from)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.node_count;
        (0..n).flat_map(move |to| {
            (0..n).filter_map(move |from| {
                let w = self.weight(to, from);
                (w != 0.0).then_some((from, to, w))
            })
        })
    }

    pub fn adjacency(&self) -> Matrix {
        Matrix::from_vec(self.node_count, self.node_count, self.weights.clone())
            .expect("weights are finite by construction")
    }

    /// `L = D − A` with `l_ii = Σ_k a_ik`.
    pub fn laplacian(&self) -> Matrix {
        let n = self.node_count;
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i != j {
                    let a = self.weight(i, j);
                    l[(i, j)] = -a;
                    row_sum += a;
                }
            }
            l[(i, i)] = row_sum;
        }
        l
    }

    /// Nodes reachable from `root` following information flow (`j` to `i`
    /// whenever `a_ij > 0`).
    pub fn reachable_from(&self, root: usize) -> Vec<bool> {
        let n = self.node_count;
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(j) = queue.pop_front() {
            for i in 0..n {
                if !seen[i] && self.weight(i, j) > 0.0 {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        seen
    }

    /// Smallest-index node that reaches every other node, if any.
    pub fn spanning_tree_root(&self) -> Option<usize> {
        (0..self.node_count).find(|&r| self.reachable_from(r).iter().all(|&s| s))
    }

    pub fn has_spanning_tree(&self) -> bool {
        self.spanning_tree_root().is_some()
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            node_count: self.node_count,
            edges: self
                .edges()
                .map(|(from, to, weight)| EdgeDoc {
                    from: from + 1,
                    to: to + 1,
                    weight,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &GraphDoc) -> Result<Self, TopologyError> {
        let mut g = Self::empty(doc.node_count)?;
        for e in &doc.edges {
            if e.from == 0 || e.to == 0 {
                return Err(TopologyError::Invalid(
                    "node labels are 1-based; found 0".into(),
                ));
            }
            g.add_edge(e.from - 1, e.to - 1, e.weight)?;
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("graph document serializes")
    }
}

/// The switching candidates: non-empty, all on the same node set.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSet {
    graphs: Vec<DirectedGraph>,
}

impl GraphSet {
    pub fn new(graphs: Vec<DirectedGraph>) -> Result<Self, TopologyError> {
        let first = graphs
            .first()
            .ok_or_else(|| TopologyError::Invalid("graph set is empty".into()))?;
        let n = first.node_count();
        if let Some((i, g)) = graphs.iter().enumerate().find(|(_, g)| g.node_count() != n) {
            return Err(TopologyError::Invalid(format!(
                "graph {} has {} nodes, graph 1 has {n}",
                i + 1,
                g.node_count()
            )));
        }
        Ok(Self { graphs })
    }

    pub fn node_count(&self) -> usize {
        self.graphs[0].node_count()
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn graphs(&self) -> &[DirectedGraph] {
        &self.graphs
    }

    pub fn get(&self, i: usize) -> Option<&DirectedGraph> {
        self.graphs.get(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_laplacian() {
        let g = DirectedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let l = g.laplacian();
        assert_eq!(l.to_rows(), vec![vec![0.0, 0.0], vec![-1.0, 1.0]]);
        assert_eq!(
            DirectedGraph::empty(3).unwrap().laplacian(),
            Matrix::zeros(3, 3)
        );
    }

    #[test]
    fn spanning_tree_examples() {
        let chain = DirectedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(chain.spanning_tree_root(), Some(0));
        let isolated = DirectedGraph::empty(2).unwrap();
        assert_eq!(isolated.spanning_tree_root(), None);
        let tri = DirectedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        assert!(tri.has_spanning_tree());
        assert_eq!(
            DirectedGraph::empty(1).unwrap().spanning_tree_root(),
            Some(0)
        );
    }

    #[test]
    fn invalid_edges_rejected() {
        let mut g = DirectedGraph::empty(3).unwrap();
        assert!(g.add_edge(0, 0, 1.0).is_err());
        assert!(g.add_edge(0, 3, 1.0).is_err());
        assert!(g.add_edge(0, 1, -1.0).is_err());
        assert!(g.add_edge(0, 1, f64::NAN).is_err());
        g.add_edge(0, 1, 2.0).unwrap();
        assert!(g.add_edge(0, 1, 2.0).is_err());
        assert!(DirectedGraph::empty(0).is_err());
    }

    #[test]
    fn json_uses_one_based_flow_direction() {
        let g = DirectedGraph::from_json(
            r#"{"node_count":2,"edges":[{"from":1,"to":2,"weight":0.5}]}"#,
        )
        .unwrap();
        assert_eq!(g.weight(1, 0), 0.5);
        assert!(DirectedGraph::from_json(
            r#"{"node_count":2,"edges":[{"from":0,"to":1,"weight":1}]}"#
        )
        .is_err());
        assert!(DirectedGraph::from_json(r#"{"node_count":2,"edges":[],"extra":1}"#).is_err());
    }

    #[test]
    fn graph_set_requires_common_nodes() {
        let a = DirectedGraph::empty(3).unwrap();
        let b = DirectedGraph::empty(4).unwrap();
        assert!(GraphSet::new(vec![]).is_err());
        assert!(GraphSet::new(vec![a.clone(), b]).is_err());
        assert_eq!(GraphSet::new(vec![a.clone(), a]).unwrap().len(), 2);
    }
}
