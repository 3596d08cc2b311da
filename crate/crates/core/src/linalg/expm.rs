//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, chosen from the 1-norm.

use super::{decomp, LinalgError, Matrix};

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// largest 1-norms for which each degree meets unit roundoff
#[allow(clippy::excessive_precision)]
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn axpy_into(acc: &mut Matrix, s: f64, m: &Matrix) {
    *acc = &*acc + &m.scale(s);
}

/// `(u, v)` with `exp(a) ≈ (v - u)⁻¹ (v + u)` for the low-degree approximants.
fn pade_low(a: &Matrix, b: &[f64]) -> (Matrix, Matrix) {
    let n = a.rows();
    let a2 = a * a;
    let mut powers = vec![Matrix::identity(n), a2.clone()];
    let m = b.len() - 1;
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut odd = Matrix::zeros(n, n);
    let mut even = Matrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k < m {
            axpy_into(&mut odd, b[2 * k + 1], p);
        }
        axpy_into(&mut even, b[2 * k], p);
    }
    (a * &odd, even)
}

fn pade13(a: &Matrix) -> (Matrix, Matrix) {
    let b = &B13;
    let n = a.rows();
    let id = Matrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let w1 = &(&a6.scale(b[13]) + &a4.scale(b[11])) + &a2.scale(b[9]);
    let w2 = &(&(&a6.scale(b[7]) + &a4.scale(b[5])) + &a2.scale(b[3])) + &id.scale(b[1]);
    let u = a * &(&(&a6 * &w1) + &w2);
    let z1 = &(&a6.scale(b[12]) + &a4.scale(b[10])) + &a2.scale(b[8]);
    let z2 = &(&(&a6.scale(b[6]) + &a4.scale(b[4])) + &a2.scale(b[2])) + &id.scale(b[0]);
    let v = &(&a6 * &z1) + &z2;
    (u, v)
}

/// `e^m` for a real square matrix.
///
/// Returns [`LinalgError::Overflow`] instead of saturating when the result
/// (or an intermediate square) leaves the finite range.
pub fn expm(m: &Matrix) -> Result<Matrix, LinalgError> {
    let n = m.require_square("expm input")?;
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let norm = m.norm1();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let degree = THETA
        .iter()
        .find(|(_, theta)| norm <= *theta)
        .map(|(d, _)| *d);
    let ((u, v), squarings) = match degree {
        Some(3) => (pade_low(m, &B3), 0),
        Some(5) => (pade_low(m, &B5), 0),
        Some(7) => (pade_low(m, &B7), 0),
        Some(_) => (pade_low(m, &B9), 0),
        None => {
            let s = if norm > THETA13 {
                (norm / THETA13).log2().ceil() as i32
            } else {
                0
            };
            if s > 1000 {
                return Err(LinalgError::Overflow(format!(
                    "expm input norm {norm:e} is out of range"
                )));
            }
            (pade13(&m.scale(2f64.powi(-s))), s)
        }
    };

    let num = &v + &u;
    let den = &v - &u;
    let mut r = decomp::solve(&den, &num)?;
    for _ in 0..squarings {
        r = &r * &r;
        if !r.is_finite() {
            return Err(LinalgError::Overflow("expm squaring phase".into()));
        }
    }
    if !r.is_finite() {
        return Err(LinalgError::Overflow("expm result".into()));
    }
    Ok(r)
}
