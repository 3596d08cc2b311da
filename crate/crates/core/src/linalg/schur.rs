use super::{Complex, LinalgError, Matrix, Spectrum};

/// Real Schur decomposition `a = q t qᵀ` with `q` orthogonal and `t`
/// quasi-upper-triangular (1x1 and 2x2 diagonal blocks).
#[derive(Debug, Clone)]
pub struct RealSchur {
    pub t: Matrix,
    pub q: Matrix,
}

impl RealSchur {
    /// Sizes of the diagonal blocks of `t`, top to bottom.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let n = self.t.rows();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && self.t[(i + 1, i)] != 0.0 {
                out.push((i, 2));
                i += 2;
            } else {
                out.push((i, 1));
                i += 1;
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> Spectrum {
        let mut eigenvalues = Vec::with_capacity(self.t.rows());
        for (i, size) in self.blocks() {
            if size == 1 {
                eigenvalues.push(Complex::new(self.t[(i, i)], 0.0));
            } else {
                let (l1, l2) = block_eigenvalues(
                    self.t[(i, i)],
                    self.t[(i, i + 1)],
                    self.t[(i + 1, i)],
                    self.t[(i + 1, i + 1)],
                );
                eigenvalues.push(l1);
                eigenvalues.push(l2);
            }
        }
        Spectrum { eigenvalues }
    }
}

fn block_eigenvalues(a: f64, b: f64, c: f64, d: f64) -> (Complex, Complex) {
    let mean = 0.5 * (a + d);
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    if disc >= 0.0 {
        let r = disc.sqrt();
        let big = mean + r.copysign(mean);
        if big == 0.0 {
            return (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
        }
        let det = a * d - b * c;
        (Complex::new(big, 0.0), Complex::new(det / big, 0.0))
    } else {
        let r = (-disc).sqrt();
        (Complex::new(mean, r), Complex::new(mean, -r))
    }
}

/// Householder reflector `I - beta v vᵀ` sending `x` to a multiple of `e1`.
/// Returns `None` when `x` is already aligned with `e1`.
fn reflector(x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let tail: f64 = x[1..].iter().map(|v| v * v).sum();
    if tail == 0.0 {
        return None;
    }
    let norm = (x[0] * x[0] + tail).sqrt();
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vtv: f64 = v.iter().map(|e| e * e).sum();
    Some((v, 2.0 / vtv))
}

/// `m[r0.., cols] <- (I - beta v vᵀ) m[r0.., cols]`.
fn apply_left(m: &mut Matrix, v: &[f64], beta: f64, r0: usize, cols: std::ops::Range<usize>) {
    for j in cols {
        let dot: f64 = v
            .iter()
            .enumerate()
            .map(|(k, vk)| vk * m[(r0 + k, j)])
            .sum();
        let f = beta * dot;
        for (k, vk) in v.iter().enumerate() {
            m[(r0 + k, j)] -= f * vk;
        }
    }
}

/// `m[rows, c0..] <- m[rows, c0..] (I - beta v vᵀ)`.
fn apply_right(m: &mut Matrix, v: &[f64], beta: f64, c0: usize, rows: std::ops::Range<usize>) {
    for i in rows {
        let dot: f64 = v
            .iter()
            .enumerate()
            .map(|(k, vk)| vk * m[(i, c0 + k)])
            .sum();
        let f = beta * dot;
        for (k, vk) in v.iter().enumerate() {
            m[(i, c0 + k)] -= f * vk;
        }
    }
}

fn hessenberg(a: &Matrix) -> (Matrix, Matrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        if let Some((v, beta)) = reflector(&x) {
            apply_left(&mut h, &v, beta, k + 1, k..n);
            apply_right(&mut h, &v, beta, k + 1, 0..n);
            apply_right(&mut q, &v, beta, k + 1, 0..n);
            for i in (k + 2)..n {
                h[(i, k)] = 0.0;
            }
        }
    }
    (h, q)
}

/// Francis implicit double-shift QR on an upper Hessenberg matrix,
/// updating the full matrix so the result is a genuine Schur form.
fn francis(h: &mut Matrix, q: &mut Matrix) -> Result<(), LinalgError> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let norm = h.frobenius().max(f64::MIN_POSITIVE);
    let max_total = 60 * n.max(4);
    let mut total = 0usize;
    let mut iter = 0usize;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].abs() + h[(lo, lo)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(lo, lo - 1)].abs() <= eps * s {
                h[(lo, lo - 1)] = 0.0;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        if lo + 1 == hi {
            if hi == 1 {
                break;
            }
            hi -= 2;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if total > max_total {
            return Err(LinalgError::NoConvergence("real Schur QR iteration"));
        }

        let (s, t) = if iter.is_multiple_of(10) {
            let w = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
            let d = 0.75 * w + h[(hi, hi)];
            (2.0 * d, d * d + 0.4375 * w * w)
        } else {
            let (a, b) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)]);
            let (c, d) = (h[(hi, hi - 1)], h[(hi, hi)]);
            (a + d, a * d - b * c)
        };

        let (h00, h01) = (h[(lo, lo)], h[(lo, lo + 1)]);
        let (h10, h11) = (h[(lo + 1, lo)], h[(lo + 1, lo + 1)]);
        let mut x = h00 * h00 + h01 * h10 - s * h00 + t;
        let mut y = h10 * (h00 + h11 - s);
        let mut z = h10 * h[(lo + 2, lo + 1)];

        for k in lo..hi {
            let three = k + 2 <= hi;
            let col0 = if k > lo { k - 1 } else { lo };
            let refl = if three {
                reflector(&[x, y, z])
            } else {
                reflector(&[x, y])
            };
            if let Some((v, beta)) = refl {
                apply_left(h, &v, beta, k, col0..n);
                let row_end = (k + 3).min(hi) + 1;
                apply_right(h, &v, beta, k, 0..row_end);
                apply_right(q, &v, beta, k, 0..n);
            }
            if k > lo {
                h[(k + 1, k - 1)] = 0.0;
                if three {
                    h[(k + 2, k - 1)] = 0.0;
                }
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
                z = if k + 3 <= hi { h[(k + 3, k)] } else { 0.0 };
            }
        }
    }
    Ok(())
}

pub fn real_schur(a: &Matrix) -> Result<RealSchur, LinalgError> {
    a.require_square("Schur input")?;
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let (mut t, mut q) = hessenberg(a);
    francis(&mut t, &mut q)?;
    let n = t.rows();
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            t[(i, j)] = 0.0;
        }
    }
    Ok(RealSchur { t, q })
}

/// All eigenvalues of a real square matrix (with multiplicity).
/// Permutation step of balancing: peels off indices whose row (or column)
/// has no off-diagonal entry inside the remaining principal submatrix.
/// Each peeled diagonal entry is an exact eigenvalue. Returns those values
/// and the indices left over.
fn isolate(m: &Matrix) -> (Vec<f64>, Vec<usize>) {
    let mut active: Vec<usize> = (0..m.rows()).collect();
    let mut isolated = Vec::new();
    loop {
        let row = active
            .iter()
            .position(|&r| active.iter().all(|&c| c == r || m[(r, c)] == 0.0));
        let col = row.or_else(|| {
            active
                .iter()
                .position(|&c| active.iter().all(|&r| r == c || m[(r, c)] == 0.0))
        });
        match col {
            Some(pos) => {
                let i = active.remove(pos);
                isolated.push(m[(i, i)]);
            }
            None => return (isolated, active),
        }
    }
}

/// Full spectrum: eigenvalues exposed by permutation are read off exactly,
/// the rest come from the real Schur form of the remaining block.
pub fn eigenvalues(m: &Matrix) -> Result<Spectrum, LinalgError> {
    m.require_square("eigenvalue input")?;
    let (isolated, rest) = isolate(m);
    let mut eigenvalues: Vec<Complex> =
        isolated.into_iter().map(|v| Complex::new(v, 0.0)).collect();
    if !rest.is_empty() {
        let k = rest.len();
        let mut sub = Matrix::zeros(k, k);
        for (i, &r) in rest.iter().enumerate() {
            for (j, &c) in rest.iter().enumerate() {
                sub[(i, j)] = m[(r, c)];
            }
        }
        eigenvalues.extend(real_schur(&sub)?.eigenvalues().eigenvalues);
    }
    Ok(Spectrum { eigenvalues })
}
