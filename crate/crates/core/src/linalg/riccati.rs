//! Stabilizing solution of the continuous algebraic Riccati equation
//! `aᵀX + Xa − X b bᵀ X + w = 0` by Newton-Kleinman iteration.

use super::controllability::uncontrollable_modes;
use super::lyapunov::solve_lyapunov;
use super::schur::eigenvalues;
use super::{checked_symmetric, decomp, LinalgError, Matrix};

const NEWTON_MAX_STEPS: usize = 60;
const SIGN_MAX_STEPS: usize = 100;

/// `aᵀX + Xa − X b bᵀ X + w`.
pub fn care_residual(a: &Matrix, b: &Matrix, w: &Matrix, x: &Matrix) -> Matrix {
    let xb = x * b;
    let quad = &xb * &xb.transpose();
    let lin = &(&a.transpose() * x) + &(x * a);
    &(&lin - &quad) + w
}

/// Magnitude of the terms that make up [`care_residual`]:
/// `‖w‖ + 2‖aᵀX‖ + ‖X b bᵀ X‖` in the max norm. Rounding in the residual
/// grows with this, not with `‖w‖` alone.
pub fn care_scale(a: &Matrix, b: &Matrix, w: &Matrix, x: &Matrix) -> f64 {
    let xb = x * b;
    let quad = &xb * &xb.transpose();
    w.max_abs() + 2.0 * (&a.transpose() * x).max_abs() + quad.max_abs()
}

/// Stabilizing gain from the shifted-Gramian construction: with
/// `ζ > max(0, −min Re λ(a))`, the solution `W` of
/// `(a + ζI) W + W (a + ζI)ᵀ = 2 b bᵀ` is positive definite for a
/// controllable pair, and `K = bᵀ W⁻¹` makes `a − bK` Hurwitz
/// (`(a − bK) W + W (a − bK)ᵀ = −2ζ W`).
fn gramian_gain(a: &Matrix, b: &Matrix) -> Result<Option<Matrix>, LinalgError> {
    let n = a.rows();
    let spectrum = eigenvalues(a)?;
    let zeta = 1.0 + spectrum.max_modulus().max(-spectrum.min_real());
    let shifted = a.shift(zeta).transpose();
    let bbt = b * &b.transpose();
    // solve_lyapunov(Mᵀ, c) solves M W + W Mᵀ = c
    let w = solve_lyapunov(&shifted, &bbt.scale(2.0))?;
    let def = decomp::is_positive_definite(&w)?;
    let diag_max = (0..n).map(|i| w[(i, i)]).fold(0.0, f64::max);
    if !def.positive_definite || def.min_pivot <= 1e-15 * diag_max {
        return Ok(None);
    }
    match decomp::inverse(&w) {
        Ok(winv) => Ok(Some(&b.transpose() * &winv)),
        Err(LinalgError::Singular) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Initial solution from the matrix sign function of the Hamiltonian;
/// used when the pair is stabilizable but not controllable.
fn sign_function_solution(a: &Matrix, b: &Matrix, w: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.rows();
    let bbt = b * &b.transpose();
    let mut z = Matrix::zeros(2 * n, 2 * n);
    z.set_block(0, 0, a);
    z.set_block(0, n, &-&bbt);
    z.set_block(n, 0, &-w);
    z.set_block(n, n, &-&a.transpose());
    let mut converged = false;
    for _ in 0..SIGN_MAX_STEPS {
        let zinv = decomp::inverse(&z).map_err(|_| {
            LinalgError::Riccati("Hamiltonian has eigenvalues on the imaginary axis".into())
        })?;
        let det = decomp::determinant(&z)?.abs();
        let c = if det > 0.0 && det.is_finite() {
            det.powf(-1.0 / (2 * n) as f64)
        } else {
            1.0
        };
        let next = (&z.scale(c) + &zinv.scale(1.0 / c)).scale(0.5);
        let delta = (&next - &z).norm1();
        z = next;
        if delta <= 1e-13 * z.norm1() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence("Hamiltonian sign iteration"));
    }
    // (sign(H) + I) [I; X] = 0  =>  [Z12; Z22 + I] X = −[Z11 + I; Z21]
    let mut lhs = Matrix::zeros(2 * n, n);
    let mut rhs = Matrix::zeros(2 * n, n);
    lhs.set_block(0, 0, &z.submatrix(0, n, n, n));
    lhs.set_block(n, 0, &z.submatrix(n, n, n, n).shift(1.0));
    rhs.set_block(0, 0, &-&z.submatrix(0, 0, n, n).shift(1.0));
    rhs.set_block(n, 0, &-&z.submatrix(n, 0, n, n));
    let lt = lhs.transpose();
    let x = decomp::solve(&(&lt * &lhs), &(&lt * &rhs))?;
    Ok(x.symmetrize())
}

fn is_hurwitz(m: &Matrix) -> Result<bool, LinalgError> {
    Ok(eigenvalues(m)?.max_real() < 0.0)
}

/// Stabilizing solution `X ≻ 0` of `aᵀX + Xa − X b bᵀ X + w = 0`.
///
/// Requires `(a, b)` stabilizable and `w` symmetric positive definite.
/// Newton-Kleinman needs a stabilizing starting gain; it comes from the
/// shifted controllability Gramian when the pair is controllable and from
/// the Hamiltonian sign function otherwise. The residual must not exceed
/// `1e-9` times [`care_scale`].
pub fn solve_care(a: &Matrix, b: &Matrix, w: &Matrix) -> Result<Matrix, LinalgError> {
    let x = solve_care_unverified(a, b, w)?;
    let res = care_residual(a, b, w, &x).max_abs();
    if res > 1e-9 * care_scale(a, b, w, &x) {
        return Err(LinalgError::Riccati(format!(
            "residual {res:e} above tolerance after Newton iteration"
        )));
    }
    Ok(x)
}

/// Same iteration as [`solve_care`] without the residual bound, for
/// callers that certify the result some other way. The closed loop is
/// still checked to be Hurwitz.
pub fn solve_care_unverified(a: &Matrix, b: &Matrix, w: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.require_square("Riccati state matrix")?;
    if b.rows() != n || w.rows() != n || w.cols() != n {
        return Err(LinalgError::Shape("Riccati operand sizes disagree".into()));
    }
    let w = checked_symmetric(w)?;
    let def = decomp::is_positive_definite(&w)?;
    if !def.positive_definite {
        return Err(LinalgError::NotPositiveDefinite {
            pivot: def.min_pivot,
        });
    }
    let uncontrollable = uncontrollable_modes(a, b)?;
    if let Some(bad) = uncontrollable.iter().find(|m| m.eigenvalue.re >= 0.0) {
        return Err(LinalgError::NotStabilizable(bad.eigenvalue));
    }

    let bt = b.transpose();
    let mut k = if uncontrollable.is_empty() {
        gramian_gain(a, b)?
    } else {
        None
    };
    if k.is_none() {
        let x0 = sign_function_solution(a, b, &w)?;
        k = Some(&bt * &x0);
    }
    let mut k = k.expect("initial gain");
    if !is_hurwitz(&(a - &(b * &k)))? {
        return Err(LinalgError::Riccati(
            "initial gain is not stabilizing".into(),
        ));
    }

    let mut x_prev: Option<Matrix> = None;
    let mut x = Matrix::zeros(n, n);
    for _ in 0..NEWTON_MAX_STEPS {
        let closed = a - &(b * &k);
        // closedᵀ X + X closed = −(w + Kᵀ K)
        let rhs = -&(&w + &(&k.transpose() * &k));
        x = solve_lyapunov(&closed, &rhs)?;
        k = &bt * &x;
        if let Some(prev) = &x_prev {
            if x.max_diff(prev) <= 1e-14 * (1.0 + x.max_abs()) {
                break;
            }
        }
        x_prev = Some(x.clone());
    }

    if !is_hurwitz(&(a - &(b * &(&bt * &x))))? {
        return Err(LinalgError::Riccati("solution is not stabilizing".into()));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_rows(&[[v]]).unwrap()
    }

    #[test]
    fn scalar_integrator() {
        let x = solve_care(&scalar(0.0), &scalar(1.0), &scalar(1.0)).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_unstable() {
        let x = solve_care(&scalar(1.0), &scalar(1.0), &scalar(3.0)).unwrap();
        assert!((x[(0, 0)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn stabilizable_not_controllable_uses_sign_start() {
        let a = Matrix::from_rows(&[[-1.0, 0.0], [0.3, 0.5]]).unwrap();
        let b = Matrix::column(&[0.0, 1.0]).unwrap();
        let x = solve_care(&a, &b, &Matrix::identity(2)).unwrap();
        let r = care_residual(&a, &b, &Matrix::identity(2), &x).max_abs();
        assert!(r < 1e-10, "residual {r}");
        assert!(decomp::is_positive_definite(&x).unwrap().positive_definite);
    }

    #[test]
    fn unstabilizable_rejected() {
        let a = Matrix::from_diag(&[1.0, 0.0]);
        let b = Matrix::column(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            solve_care(&a, &b, &Matrix::identity(2)),
            Err(LinalgError::NotStabilizable(_))
        ));
    }
}
