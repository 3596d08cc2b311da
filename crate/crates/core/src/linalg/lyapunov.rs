use super::schur::{real_schur, RealSchur};
use super::{checked_symmetric, decomp, LinalgError, Matrix, EIGEN_PAIR_TOL};

/// `aᵀ x + x a - c`.
pub fn lyapunov_residual(a: &Matrix, x: &Matrix, c: &Matrix) -> Matrix {
    let lhs = &(&a.transpose() * x) + &(x * a);
    &lhs - c
}

/// Solves the continuous Lyapunov equation `aᵀ X + X a = c` by the
/// Bartels-Stewart method on the real Schur form of `a`.
///
/// The solution is unique iff no two eigenvalues of `a` sum to zero. For
/// Hurwitz `a` and negative definite `c` (or antistable `a` and positive
/// definite `c`) the solution is positive definite.
pub fn solve_lyapunov(a: &Matrix, c: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.require_square("Lyapunov coefficient")?;
    if c.rows() != n || c.cols() != n {
        return Err(LinalgError::Shape(format!(
            "Lyapunov right-hand side is {}x{}, expected {n}x{n}",
            c.rows(),
            c.cols()
        )));
    }
    let c = checked_symmetric(c)?;
    let schur = real_schur(a)?;
    let spectrum = schur.eigenvalues();
    let scale = 1.0 + spectrum.max_modulus();
    for (i, li) in spectrum.eigenvalues.iter().enumerate() {
        for lj in &spectrum.eigenvalues[i..] {
            let sum_re = li.re + lj.re;
            let sum_im = li.im + lj.im;
            if sum_re.hypot(sum_im) <= EIGEN_PAIR_TOL * scale {
                return Err(LinalgError::LyapunovSpectrum(*li, *lj));
            }
        }
    }

    let mut x = solve_schur_form(&schur, &c)?;
    // one round of refinement against the original equation
    let r = lyapunov_residual(a, &x, &c);
    if r.max_abs() > 0.0 {
        let dx = solve_schur_form(&schur, &r.symmetrize())?;
        x = &x - &dx;
    }
    let x = x.symmetrize();
    if !x.is_finite() {
        return Err(LinalgError::Overflow("Lyapunov solution".into()));
    }
    let res = lyapunov_residual(a, &x, &c).max_abs();
    let bound = 1e-8 * (1.0 + c.max_abs()) * (1.0 + x.max_abs()).max(1.0);
    if res > bound {
        return Err(LinalgError::NoConvergence(
            "Lyapunov solve (ill-conditioned)",
        ));
    }
    Ok(x)
}

fn solve_schur_form(schur: &RealSchur, c: &Matrix) -> Result<Matrix, LinalgError> {
    let RealSchur { t, q } = schur;
    let f = &(&q.transpose() * c) * q;
    let blocks = schur.blocks();
    let n = t.rows();
    let mut y = Matrix::zeros(n, n);

    for &(bi, pi) in &blocks {
        for &(bj, qj) in &blocks {
            // rhs = F_IJ - sum_{K<I} T_KIᵀ Y_KJ - sum_{K<J} Y_IK T_KJ
            let mut rhs = f.submatrix(bi, bj, pi, qj);
            for i in 0..pi {
                for j in 0..qj {
                    let mut acc = 0.0;
                    for k in 0..bi {
                        acc += t[(k, bi + i)] * y[(k, bj + j)];
                    }
                    for k in 0..bj {
                        acc += y[(bi + i, k)] * t[(k, bj + j)];
                    }
                    rhs[(i, j)] -= acc;
                }
            }
            // T_IIᵀ Y + Y T_JJ = rhs, vectorized row-major: u = i*q + j
            let m = pi * qj;
            let mut sys = Matrix::zeros(m, m);
            let mut b = Matrix::zeros(m, 1);
            for i in 0..pi {
                for j in 0..qj {
                    let u = i * qj + j;
                    b[(u, 0)] = rhs[(i, j)];
                    for r in 0..pi {
                        sys[(u, r * qj + j)] += t[(bi + r, bi + i)];
                    }
                    for s in 0..qj {
                        sys[(u, i * qj + s)] += t[(bj + s, bj + j)];
                    }
                }
            }
            let sol = decomp::solve(&sys, &b)?;
            for i in 0..pi {
                for j in 0..qj {
                    y[(bi + i, bj + j)] = sol[(i * qj + j, 0)];
                }
            }
        }
    }
    Ok(&(q * &y) * &q.transpose())
}
