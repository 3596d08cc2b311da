use super::schur::eigenvalues;
use super::{decomp, Complex, LinalgError, Matrix};

/// Relative rank cutoff for the PBH test: `σ_min < PBH_RANK_TOL · σ_max`.
pub const PBH_RANK_TOL: f64 = 1e-8;

/// An eigenvalue of `a` that the input matrix `b` cannot influence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncontrollableMode {
    pub eigenvalue: Complex,
    /// `σ_min / σ_max` of `[λI - a, b]`.
    pub rank_ratio: f64,
}

/// Popov-Belevitch-Hautus test: every eigenvalue `λ` of `a` for which
/// `[λI - a, b]` loses row rank.
///
/// Complex `λ` are handled through the real embedding
/// `[[Re M, -Im M], [Im M, Re M]]`, whose singular values are those of `M`
/// with doubled multiplicity.
pub fn uncontrollable_modes(
    a: &Matrix,
    b: &Matrix,
) -> Result<Vec<UncontrollableMode>, LinalgError> {
    let n = a.require_square("state matrix")?;
    if b.rows() != n {
        return Err(LinalgError::Shape(format!(
            "input matrix has {} rows, state dimension is {n}",
            b.rows()
        )));
    }
    let spectrum = eigenvalues(a)?;
    let m = b.cols();
    let mut modes = Vec::new();
    for &lambda in &spectrum.eigenvalues {
        let cols = n + m;
        let mut emb = Matrix::zeros(2 * n, 2 * cols);
        for i in 0..n {
            for j in 0..n {
                let re = if i == j { lambda.re } else { 0.0 } - a[(i, j)];
                let im = if i == j { lambda.im } else { 0.0 };
                emb[(i, j)] = re;
                emb[(i, cols + j)] = -im;
                emb[(n + i, j)] = im;
                emb[(n + i, cols + j)] = re;
            }
            for j in 0..m {
                emb[(i, n + j)] = b[(i, j)];
                emb[(n + i, cols + n + j)] = b[(i, j)];
            }
        }
        let sv = decomp::singular_values(&emb);
        let (max, min) = (sv[0], *sv.last().unwrap());
        let ratio = if max == 0.0 { 0.0 } else { min / max };
        if ratio < PBH_RANK_TOL {
            modes.push(UncontrollableMode {
                eigenvalue: lambda,
                rank_ratio: ratio,
            });
        }
    }
    Ok(modes)
}
