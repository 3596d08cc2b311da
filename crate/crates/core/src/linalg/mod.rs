//! Dense real linear algebra used throughout the crate.
//!
//! Everything here is a pure function over [`Matrix`] values. Sizes in this
//! problem domain are small (tens of rows), so the routines favour clear
//! textbook algorithms over blocked kernels.

mod controllability;
mod decomp;
mod expm;
mod lyapunov;
mod matrix;
mod riccati;
mod schur;

pub use controllability::{uncontrollable_modes, UncontrollableMode};
pub use decomp::{
    cholesky, determinant, inverse, is_positive_definite, max_generalized_eigenvalue,
    singular_values, solve, symmetric_eigenvalues, Definiteness,
};
pub use expm::expm;
pub use lyapunov::{lyapunov_residual, solve_lyapunov};
pub use matrix::Matrix;
pub use riccati::{care_residual, care_scale, solve_care, solve_care_unverified};
pub use schur::{eigenvalues, real_schur, RealSchur};

use thiserror::Error;

/// Relative symmetry tolerance applied before symmetric routines.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Tolerance used when pairing eigenvalues (`λ_i + λ_j ≈ 0`).
pub const EIGEN_PAIR_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("{what} must be square, got {rows}x{cols}")]
    NotSquare {
        what: String,
        rows: usize,
        cols: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not positive definite (smallest pivot {pivot:e})")]
    NotPositiveDefinite { pivot: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("Lyapunov solution not unique: eigenvalues {0} and {1} sum to zero")]
    LyapunovSpectrum(Complex, Complex),
    #[error("pair is not stabilizable: uncontrollable mode {0} is not stable")]
    NotStabilizable(Complex),
    #[error("Riccati iteration failed: {0}")]
    Riccati(String),
    #[error("overflow: {0}")]
    Overflow(String),
}

/// Minimal complex scalar, enough to report spectra.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }
}

impl std::ops::Mul for Complex {
    type Output = Complex;

    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl std::fmt::Display for Complex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re)
        } else if self.im > 0.0 {
            write!(f, "{}+{}i", self.re, self.im)
        } else {
            write!(f, "{}-{}i", self.re, -self.im)
        }
    }
}

/// Eigenvalues of a real square matrix, with algebraic multiplicity.
///
/// Order is unspecified; use the reductions below.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Smallest real part.
    pub fn min_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest real part (spectral abscissa).
    pub fn max_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.abs()).fold(0.0, f64::max)
    }

    pub fn sum(&self) -> Complex {
        self.eigenvalues.iter().fold(Complex::default(), |acc, z| {
            Complex::new(acc.re + z.re, acc.im + z.im)
        })
    }

    pub fn product(&self) -> Complex {
        self.eigenvalues
            .iter()
            .fold(Complex::new(1.0, 0.0), |acc, z| acc * *z)
    }

    /// Real parts sorted ascending; convenient for comparisons of real spectra.
    pub fn sorted_real_parts(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigenvalues.iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Symmetrizes `m` after checking relative asymmetry against [`SYMMETRY_TOL`].
pub(crate) fn checked_symmetric(m: &Matrix) -> Result<Matrix, LinalgError> {
    m.require_square("symmetric input")?;
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL * (1.0 + m.max_abs()) {
        return Err(LinalgError::NotSymmetric { asymmetry: asym });
    }
    Ok(m.symmetrize())
}
