use serde::{Deserialize, Serialize};

use super::TopologyError;
use crate::linalg::{eigenvalues, LinalgError, Matrix, Spectrum};

/// Row-sum tolerance (relative to the largest entry) for accepting a Laplacian.
pub const LAPLACIAN_ROW_SUM_TOL: f64 = 1e-12;

/// `Ξ L Π`, the `(N−1)×(N−1)` matrix driving the disagreement dynamics,
/// with `Ξ = [I, −1]` and `Π = [I; 0ᵀ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedLaplacian {
    pub matrix: Matrix,
    /// Index of the graph this came from, when known.
    pub source: Option<usize>,
}

/// `Ξ = [I_{N−1}, −1_{N−1}]`.
pub fn xi(n: usize) -> Matrix {
    let mut m = Matrix::zeros(n - 1, n);
    for i in 0..n - 1 {
        m[(i, i)] = 1.0;
        m[(i, n - 1)] = -1.0;
    }
    m
}

/// `Π = [I_{N−1}; 0ᵀ]`.
pub fn pi(n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n - 1);
    for i in 0..n - 1 {
        m[(i, i)] = 1.0;
    }
    m
}

/// Reduces an `N×N` Laplacian: `L̂_jk = L_jk − L_Nk` for `j, k < N`.
pub fn reduce(l: &Matrix) -> Result<ReducedLaplacian, TopologyError> {
    let n = l.rows();
    if l.cols() != n {
        return Err(TopologyError::Invalid("Laplacian must be square".into()));
    }
    if n < 2 {
        return Err(TopologyError::Invalid(
            "reduction needs at least two agents".into(),
        ));
    }
    let scale = l.max_abs().max(1.0);
    for i in 0..n {
        let s: f64 = l.row(i).iter().sum();
        if s.abs() > LAPLACIAN_ROW_SUM_TOL * scale {
            return Err(TopologyError::NotLaplacian { row: i, sum: s });
        }
    }
    let mut r = Matrix::zeros(n - 1, n - 1);
    for j in 0..n - 1 {
        for k in 0..n - 1 {
            r[(j, k)] = l[(j, k)] - l[(n - 1, k)];
        }
    }
    Ok(ReducedLaplacian {
        matrix: r,
        source: None,
    })
}

impl ReducedLaplacian {
    pub fn with_source(mut self, source: usize) -> Self {
        self.source = Some(source);
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn spectrum(&self) -> Result<Spectrum, LinalgError> {
        eigenvalues(&self.matrix)
    }

    /// `min_j Re λ_j(L̂)`. Positive iff the source graph has a directed
    /// spanning tree.
    pub fn antistability_margin(&self) -> Result<f64, LinalgError> {
        Ok(self.spectrum()?.min_real())
    }
}
