use super::{checked_symmetric, LinalgError, Matrix};

struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

fn lu(a: &Matrix) -> Result<Lu, LinalgError> {
    let n = a.require_square("LU input")?;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = false;
    let tiny = f64::EPSILON * a.max_abs() * n as f64;
    for k in 0..n {
        let (p, big) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if big <= tiny || big == 0.0 {
            singular = true;
            continue;
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            if f != 0.0 {
                for j in (k + 1)..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
    }
    Ok(Lu {
        lu,
        perm,
        sign,
        singular,
    })
}

/// Solves `a x = b` for every column of `b` by partial-pivoting LU.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.require_square("coefficient matrix")?;
    if b.rows() != n {
        return Err(LinalgError::Shape(format!(
            "right-hand side has {} rows, expected {n}",
            b.rows()
        )));
    }
    let f = lu(a)?;
    if f.singular {
        return Err(LinalgError::Singular);
    }
    let mut x = Matrix::zeros(n, b.cols());
    for c in 0..b.cols() {
        let mut y: Vec<f64> = f.perm.iter().map(|&p| b[(p, c)]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| f.lu[(i, j)] * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| f.lu[(i, j)] * y[j]).sum();
            y[i] = (y[i] - s) / f.lu[(i, i)];
        }
        for i in 0..n {
            x[(i, c)] = y[i];
        }
    }
    if !x.is_finite() {
        return Err(LinalgError::Singular);
    }
    Ok(x)
}

pub fn inverse(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.require_square("inverse input")?;
    solve(a, &Matrix::identity(n))
}

pub fn determinant(a: &Matrix) -> Result<f64, LinalgError> {
    let n = a.require_square("determinant input")?;
    let f = lu(a)?;
    if f.singular {
        return Ok(0.0);
    }
    Ok((0..n).fold(f.sign, |d, i| d * f.lu[(i, i)]))
}

/// Outcome of a definiteness test: the verdict plus the smallest pivot seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Definiteness {
    pub positive_definite: bool,
    /// Smallest `D` pivot of the `L D Lᵀ` factorization. When the matrix is
    /// not positive definite this is the first non-positive pivot.
    pub min_pivot: f64,
}

/// Positive-definiteness test via an unpivoted `L D Lᵀ` factorization.
pub fn is_positive_definite(m: &Matrix) -> Result<Definiteness, LinalgError> {
    let a = checked_symmetric(m)?;
    let n = a.rows();
    let mut l = Matrix::identity(n);
    let mut d = vec![0.0; n];
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let s: f64 = (0..j).map(|k| l[(j, k)] * l[(j, k)] * d[k]).sum();
        d[j] = a[(j, j)] - s;
        min_pivot = min_pivot.min(d[j]);
        if d[j] <= 0.0 || !d[j].is_finite() {
            return Ok(Definiteness {
                positive_definite: false,
                min_pivot: d[j],
            });
        }
        for i in (j + 1)..n {
            let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)] * d[k]).sum();
            l[(i, j)] = (a[(i, j)] - s) / d[j];
        }
    }
    Ok(Definiteness {
        positive_definite: true,
        min_pivot,
    })
}

/// Lower-triangular Cholesky factor `L` with `m = L Lᵀ`.
pub fn cholesky(m: &Matrix) -> Result<Matrix, LinalgError> {
    let a = checked_symmetric(m)?;
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let s: f64 = (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum();
        let d = a[(j, j)] - s;
        if d <= 0.0 || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
            l[(i, j)] = (a[(i, j)] - s) / djj;
        }
    }
    Ok(l)
}

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>, LinalgError> {
    let mut a = checked_symmetric(m)?;
    let n = a.rows();
    let scale = a.frobenius();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut converged = false;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence("symmetric Jacobi eigensolver"));
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Singular values, descending, via one-sided (Hestenes) Jacobi.
///
/// One-sided Jacobi keeps small singular values accurate to working
/// precision relative to the largest, which the rank tests rely on.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    // orthogonalize the columns of whichever orientation has fewer columns
    let mut a = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.transpose()
    };
    let (rows, cols) = (a.rows(), a.cols());
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * x - s * y;
                    a[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Largest `λ` with `q2 v = λ q1 v`, i.e. the largest eigenvalue of `q1⁻¹ q2`.
///
/// Both inputs must be symmetric positive definite. The pencil is reduced
/// to the symmetric matrix `L⁻¹ q2 L⁻ᵀ` with `q1 = L Lᵀ`.
pub fn max_generalized_eigenvalue(q1: &Matrix, q2: &Matrix) -> Result<f64, LinalgError> {
    let n = q1.require_square("q1")?;
    if q2.rows() != n || q2.cols() != n {
        return Err(LinalgError::Shape(
            "generalized pencil size mismatch".into(),
        ));
    }
    let l = cholesky(q1)?;
    let q2 = checked_symmetric(q2)?;
    let c2 = cholesky(&q2)?;
    // forward-substitute columns of c2, giving Y = L⁻¹ chol(q2); then C = Y Yᵀ
    let mut y = Matrix::zeros(n, n);
    for col in 0..n {
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[(i, k)] * y[(k, col)]).sum();
            y[(i, col)] = (c2[(i, col)] - s) / l[(i, i)];
        }
    }
    let c = (&y * &y.transpose()).symmetrize();
    let eig = symmetric_eigenvalues(&c)?;
    Ok(*eig.last().expect("non-empty spectrum"))
}
