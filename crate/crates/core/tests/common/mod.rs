//! Independent reference implementations used as test oracles. None of
//! them call into the library's numerical kernels.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use switchcons::linalg::Matrix;
use switchcons::topology::DirectedGraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    random_matrix(rng, n, n).symmetrize()
}

/// `M Mᵀ + n·I`, comfortably positive definite.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let m = random_matrix(rng, n, n);
    (&m * &m.transpose()).shift(0.5 * n as f64).symmetrize()
}

/// Gershgorin-shifted random matrix with every eigenvalue real part ≤ −0.1.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let m = random_matrix(rng, n, n);
    let radius = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    m.shift(-(radius + 0.1))
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> DirectedGraph {
    let mut g = DirectedGraph::empty(n).unwrap();
    for from in 0..n {
        for to in 0..n {
            if from != to && rng.gen_bool(density) {
                g.add_edge(from, to, rng.gen_range(0.2..2.0)).unwrap();
            }
        }
    }
    g
}

/// Gaussian elimination with partial pivoting on a dense row-major system.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Solves `aᵀX + Xa = c` through the `n²×n²` vectorized system.
pub fn kronecker_lyapunov(a: &Matrix, c: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    let idx = |i: usize, j: usize| i * n + j;
    let mut sys = vec![vec![0.0; n * n]; n * n];
    for i in 0..n {
        for j in 0..n {
            let row = idx(i, j);
            // (aᵀX)_ij = Σ_k a_ki X_kj ; (Xa)_ij = Σ_k X_ik a_kj
            for k in 0..n {
                sys[row][idx(k, j)] += a[(k, i)];
                sys[row][idx(i, k)] += a[(k, j)];
            }
        }
    }
    let rhs = c.as_slice().to_vec();
    let x = gauss_solve(sys, rhs)?;
    Matrix::from_vec(n, n, x).ok()
}

/// Transitive closure by Floyd-Warshall: `reach[j][i]` iff information
/// from `j` arrives at `i`.
pub fn closure(g: &DirectedGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut reach = vec![vec![false; n]; n];
    for j in 0..n {
        reach[j][j] = true;
        for i in 0..n {
            if g.weight(i, j) > 0.0 {
                reach[j][i] = true;
            }
        }
    }
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                if reach[j][k] && reach[k][i] {
                    reach[j][i] = true;
                }
            }
        }
    }
    reach
}

pub fn brute_force_has_tree(g: &DirectedGraph) -> bool {
    closure(g).iter().any(|row| row.iter().all(|&r| r))
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|col| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != col)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][col] * cofactor_det(&minor)
        })
        .sum()
}

/// Explicit `(Ξ ⊗ I_n) x`.
pub fn xi_kron_times(x: &[f64], agents: usize, n: usize) -> Vec<f64> {
    let mut xi = vec![vec![0.0; agents * n]; (agents - 1) * n];
    for i in 0..agents - 1 {
        for c in 0..n {
            xi[i * n + c][i * n + c] = 1.0;
            xi[i * n + c][(agents - 1) * n + c] = -1.0;
        }
    }
    xi.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn vec_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub mod props {
    //! Measurements behind the simulator properties; each returns the
    //! observed error so callers choose how to report it.

    use super::*;
    use switchcons::linalg::{eigenvalues, expm};
    use switchcons::simulator::{
        build_closed_loop, rk4_propagate, simulate, simulate_reduced, SwitchedClosedLoop,
    };
    use switchcons::topology::{GraphSet, SwitchingSignal};

    /// Random switched system: 2–4 agents of order 1–3, two or three
    /// topologies each containing a spanning tree, round-robin switching.
    /// Draws whose closed loops grow faster than `e^{2t}` are redrawn, so
    /// rounding in the consensus direction stays below the test bounds.
    pub fn random_loop(rng: &mut ChaCha8Rng) -> SwitchedClosedLoop {
        loop {
            let cl = draw_loop(rng);
            let growth = cl
                .full()
                .iter()
                .map(|m| eigenvalues(m).unwrap().max_real())
                .fold(f64::NEG_INFINITY, f64::max);
            if growth <= 2.0 {
                return cl;
            }
        }
    }

    fn draw_loop(rng: &mut ChaCha8Rng) -> SwitchedClosedLoop {
        let agents = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=n);
        let p = rng.gen_range(2..=3);
        let mut graphs = Vec::new();
        while graphs.len() < p {
            let g = random_graph(rng, agents, 0.6);
            if brute_force_has_tree(&g) {
                graphs.push(g);
            }
        }
        let a = random_matrix(rng, n, n).scale(0.5);
        let b = random_matrix(rng, n, m);
        let k = random_matrix(rng, m, n);
        let alpha = rng.gen_range(0.2..1.5);
        let dwell = rng.gen_range(0.15..0.6);
        let signal = SwitchingSignal::periodic(p, dwell, 3.0).unwrap();
        build_closed_loop(&a, &b, &k, alpha, &GraphSet::new(graphs).unwrap(), &signal).unwrap()
    }

    pub fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn scale_of(rows: &[Vec<f64>]) -> f64 {
        rows.iter().map(|r| max_abs(r)).fold(0.0, f64::max)
    }

    /// Largest entrywise gap between the disagreement traces from `x0` and
    /// from `x0 + 1_N ⊗ v`, relative to the largest disagreement entry.
    pub fn translation_error(cl: &SwitchedClosedLoop, x0: &[f64], v: &[f64], dt: f64) -> f64 {
        let n = cl.state_dim();
        let shifted: Vec<f64> = x0.iter().enumerate().map(|(i, x)| x + v[i % n]).collect();
        let a = simulate(cl, x0, dt).unwrap();
        let b = simulate(cl, &shifted, dt).unwrap();
        let gap = a
            .disagreement
            .iter()
            .zip(&b.disagreement)
            .map(|(p, q)| max_abs_diff(p, q))
            .fold(0.0, f64::max);
        gap / scale_of(&a.disagreement).max(f64::MIN_POSITIVE)
    }

    /// Gap between the full-system disagreement and the reduced system
    /// propagated from `e(0)`, relative to the largest disagreement entry.
    pub fn reduction_error(cl: &SwitchedClosedLoop, x0: &[f64], dt: f64) -> f64 {
        let full = simulate(cl, x0, dt).unwrap();
        let red = simulate_reduced(cl, &full.disagreement[0], dt).unwrap();
        assert_eq!(full.times, red.times);
        let gap = full
            .disagreement
            .iter()
            .zip(&red.states)
            .map(|(p, q)| max_abs_diff(p, q))
            .fold(0.0, f64::max);
        gap / scale_of(&full.disagreement).max(f64::MIN_POSITIVE)
    }

    /// `max_t ‖e(t)‖ / max_t ‖x(t)‖` starting from `1_N ⊗ v`.
    pub fn subspace_leak(cl: &SwitchedClosedLoop, v: &[f64], dt: f64) -> f64 {
        let x0: Vec<f64> = (0..cl.agents()).flat_map(|_| v.iter().copied()).collect();
        let tr = simulate(cl, &x0, dt).unwrap();
        let e = tr.disagreement_norm.iter().copied().fold(0.0, f64::max);
        let x = tr.states.iter().map(|s| vec_norm(s)).fold(0.0, f64::max);
        e / x.max(f64::MIN_POSITIVE)
    }

    /// Sampling `dt` versus `dt/2` on one switch-free interval: gap at the
    /// shared sample times relative to the state scale.
    pub fn sampling_gap(cl: &SwitchedClosedLoop, x0: &[f64], dt: f64) -> f64 {
        let single = cl
            .with_signal(SwitchingSignal::new(vec![0.0], vec![0], 1.0).unwrap())
            .unwrap();
        let coarse = simulate(&single, x0, dt).unwrap();
        let fine = simulate(&single, x0, dt / 2.0).unwrap();
        let mut gap: f64 = 0.0;
        for (t, x) in coarse.times.iter().zip(&coarse.states) {
            let j = fine
                .times
                .iter()
                .position(|s| (s - t).abs() < 1e-12)
                .expect("coarse sample on fine grid");
            gap = gap.max(max_abs_diff(x, &fine.states[j]));
        }
        gap / scale_of(&coarse.states).max(f64::MIN_POSITIVE)
    }

    /// Observed RK4 order over successive step halvings against the exact
    /// flow of topology 0 over `duration`; returns `log₂` error ratios.
    pub fn rk4_orders(cl: &SwitchedClosedLoop, x0: &[f64], duration: f64) -> Vec<f64> {
        let m = &cl.full()[0];
        let exact = expm(&m.scale(duration)).unwrap().matvec(x0);
        let rho = eigenvalues(m).unwrap().max_modulus().max(1.0);
        let base = ((duration * rho) / 0.5).ceil() as usize;
        let errors: Vec<f64> = (0..4)
            .map(|j| {
                let x = rk4_propagate(m, x0, duration, base << j);
                max_abs_diff(&x, &exact)
            })
            .collect();
        errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    }
}

/// `q1⁻¹ q2` by column-wise Gaussian elimination.
pub fn gauss_solve_matrix(q1: &Matrix, q2: &Matrix) -> Matrix {
    let n = q1.rows();
    let mut out = Matrix::zeros(n, n);
    for col in 0..n {
        let rhs: Vec<f64> = (0..n).map(|r| q2[(r, col)]).collect();
        let x = gauss_solve(q1.to_rows(), rhs).expect("nonsingular");
        for r in 0..n {
            out[(r, col)] = x[r];
        }
    }
    out
}

/// `σ_min / σ_max` of the Kalman matrix `[b, ab, …, aⁿ⁻¹b]` with each
/// block column normalised.
#[allow(dead_code)]
pub fn kalman_conditioning(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.rows();
    let m = b.cols();
    let mut kal = Matrix::zeros(n, n * m);
    let mut block = b.clone();
    for j in 0..n {
        let s = block.max_abs();
        let block_scaled = block.scale(if s > 0.0 { 1.0 / s } else { 1.0 });
        kal.set_block(0, j * m, &block_scaled);
        block = a * &block_scaled;
    }
    let g = &kal * &kal.transpose();
    let eig = switchcons::linalg::symmetric_eigenvalues(&g.symmetrize()).unwrap();
    (eig[0].max(0.0) / eig[n - 1]).sqrt()
}
