//! Constructive protocol synthesis.
//!
//! Both matrix inequalities of the design are solved through equations
//! whose solutions satisfy them strictly:
//!
//! * per topology, `L̂ᵀQ + QL̂ > 2cQ` is met by the Lyapunov solution of
//!   `(L̂ − cI)ᵀQ + Q(L̂ − cI) = I`, so the margin is 1 up to round-off;
//! * for the gain, `AP + PAᵀ − BBᵀ + βP < 0` is met by `P = X⁻¹` where `X`
//!   is the stabilizing Riccati solution for `Ā = A + (β/2)I` with unit
//!   weight, which makes the left-hand side exactly `−P²`. The inequality
//!   itself is then re-evaluated and must be negative definite.

mod report;
mod schedule;
mod verify;

pub use report::{
    CertificateDoc, FeasibilityDoc, ReferenceValues, SynthesisReport, REPORT_SCHEMA_VERSION,
};
pub use schedule::{check_schedule, IntervalMargin, ScheduleReport};
pub use verify::{verify_report, CheckItem, VerificationReport};

use thiserror::Error;

use crate::linalg::{
    self, care_residual, inverse, is_positive_definite, max_generalized_eigenvalue,
    solve_care_unverified, symmetric_eigenvalues, uncontrollable_modes, Complex, LinalgError,
    Matrix, UncontrollableMode,
};
use crate::par;
use crate::topology::{self, GraphSet, ReducedLaplacian, TopologyError};

/// Default fraction of the antistability margin used for `c_i`.
pub const DEFAULT_C_FRACTION: f64 = 0.9;
/// Default strict-inequality buffer in the per-switch condition.
pub const DEFAULT_KAPPA0: f64 = 1e-3;
/// Default ratio of the chosen coupling strength to its lower bound `2/c₀`.
pub const DEFAULT_ALPHA_FACTOR: f64 = 1.05;

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("topology {index} has no directed spanning tree (antistability margin {margin:e})")]
    NoSpanningTree { index: usize, margin: f64 },
    #[error("c = {c} for topology {index} is not below its antistability margin {margin}")]
    CouplingTooLarge { index: usize, c: f64, margin: f64 },
    #[error("c must be positive, got {0}")]
    NonPositiveC(f64),
    #[error("β = {beta} is infeasible: uncontrollable mode {mode} limits β below {bound}")]
    InfeasibleBeta {
        beta: f64,
        bound: f64,
        mode: Complex,
    },
    #[error("β must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("coupling strength α = {alpha} does not exceed 2/c₀ = {alpha_min}")]
    CouplingStrength { alpha: f64, alpha_min: f64 },
    #[error("expected {expected} coupling values, got {got}")]
    CouplingCount { expected: usize, got: usize },
    #[error("certificate check failed: {0}")]
    Certificate(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Solution of the per-topology inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyCertificate {
    /// 0-based topology index.
    pub index: usize,
    pub c: f64,
    pub q: Matrix,
    /// Smallest eigenvalue of `L̂ᵀQ + QL̂ − 2cQ`.
    pub lmi_margin: f64,
    /// `min Re λ(L̂)` for the same topology.
    pub antistability_margin: f64,
}

/// How the `c_i` are picked.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingChoice {
    /// `c_i = fraction · λ_min⁽ⁱ⁾`.
    Fraction(f64),
    /// Explicit value per topology.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    Value(f64),
    /// `α = factor · 2/c₀`, factor > 1.
    MarginFactor(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisParams {
    pub beta: f64,
    pub coupling: CouplingChoice,
    pub alpha: AlphaChoice,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            coupling: CouplingChoice::Fraction(DEFAULT_C_FRACTION),
            alpha: AlphaChoice::MarginFactor(DEFAULT_ALPHA_FACTOR),
        }
    }
}

/// Output of the gain inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSolution {
    pub beta: f64,
    pub p: Matrix,
    /// `K = ½ Bᵀ P⁻¹`.
    pub k: Matrix,
    /// Largest eigenvalue of `AP + PAᵀ − BBᵀ + βP`.
    pub lmi_max_eigenvalue: f64,
    /// Max-norm residual of the Riccati equation behind `P`.
    pub riccati_residual: f64,
}

/// Bound on β from the uncontrollable modes of `(A, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityBound {
    /// `min Re(−λ̃)` over uncontrollable modes; `+∞` for a controllable pair.
    pub beta_max: f64,
    pub uncontrollable: Vec<UncontrollableMode>,
}

impl FeasibilityBound {
    /// Uncontrollable eigenvalue with the largest real part.
    pub fn limiting_mode(&self) -> Option<Complex> {
        self.uncontrollable
            .iter()
            .map(|m| m.eigenvalue)
            .max_by(|a, b| a.re.total_cmp(&b.re))
    }
}

/// All synthesized artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct GainDesign {
    pub beta: f64,
    pub p: Matrix,
    pub k: Matrix,
    pub alpha: f64,
    pub alpha_min: f64,
    pub c0: f64,
    pub certificates: Vec<TopologyCertificate>,
    pub lambda_bar_max: f64,
    pub dwell_threshold: f64,
    pub gain_lmi_max_eigenvalue: f64,
    pub feasibility: FeasibilityBound,
}

pub fn choose_c(margin: f64, fraction: f64) -> Result<f64, SynthesisError> {
    if !(margin > 0.0) {
        return Err(SynthesisError::NoSpanningTree { index: 0, margin });
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(SynthesisError::Certificate(format!(
            "c fraction must lie in (0, 1), got {fraction}"
        )));
    }
    Ok(fraction * margin)
}

/// Smallest eigenvalue of `L̂ᵀQ + QL̂ − 2cQ`.
pub fn topology_lmi_margin(lhat: &Matrix, q: &Matrix, c: f64) -> Result<f64, LinalgError> {
    let m = &(&(&lhat.transpose() * q) + &(q * lhat)) - &q.scale(2.0 * c);
    let eig = symmetric_eigenvalues(&m.symmetrize())?;
    Ok(eig[0])
}

pub fn solve_topology_lmi(
    r: &ReducedLaplacian,
    c: f64,
) -> Result<TopologyCertificate, SynthesisError> {
    let index = r.source.unwrap_or(0);
    if !(c > 0.0) {
        return Err(SynthesisError::NonPositiveC(c));
    }
    let margin = r.antistability_margin()?;
    if !(margin > 0.0) {
        return Err(SynthesisError::NoSpanningTree { index, margin });
    }
    if c >= margin {
        return Err(SynthesisError::CouplingTooLarge { index, c, margin });
    }
    let n = r.dim();
    let shifted = r.matrix.shift(-c);
    let q = linalg::solve_lyapunov(&shifted, &Matrix::identity(n))?;
    let def = is_positive_definite(&q)?;
    if !def.positive_definite {
        return Err(SynthesisError::Certificate(format!(
            "Q for topology {} is not positive definite",
            index + 1
        )));
    }
    let lmi_margin = topology_lmi_margin(&r.matrix, &q, c)?;
    if !(lmi_margin > 0.0) {
        return Err(SynthesisError::Certificate(format!(
            "topology {} inequality margin {lmi_margin:e} is not positive",
            index + 1
        )));
    }
    Ok(TopologyCertificate {
        index,
        c,
        q,
        lmi_margin,
        antistability_margin: margin,
    })
}

pub fn max_feasible_beta(a: &Matrix, b: &Matrix) -> Result<FeasibilityBound, LinalgError> {
    let uncontrollable = uncontrollable_modes(a, b)?;
    let beta_max = uncontrollable
        .iter()
        .map(|m| -m.eigenvalue.re)
        .fold(f64::INFINITY, f64::min);
    Ok(FeasibilityBound {
        beta_max,
        uncontrollable,
    })
}

/// `AP + PAᵀ − BBᵀ + βP`.
pub fn gain_lmi_expression(a: &Matrix, b: &Matrix, p: &Matrix, beta: f64) -> Matrix {
    let ap = a * p;
    &(&(&ap + &ap.transpose()) - &(b * &b.transpose())) + &p.scale(beta)
}

pub fn solve_gain_lmi(a: &Matrix, b: &Matrix, beta: f64) -> Result<GainSolution, SynthesisError> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(SynthesisError::NonPositiveBeta(beta));
    }
    let n = a.require_square("A")?;
    let bound = max_feasible_beta(a, b)?;
    if beta >= bound.beta_max {
        return Err(SynthesisError::InfeasibleBeta {
            beta,
            bound: bound.beta_max,
            mode: bound.limiting_mode().unwrap_or_default(),
        });
    }
    let abar = a.shift(0.5 * beta);
    let x = solve_care_unverified(&abar, b, &Matrix::identity(n)).map_err(|e| match e {
        LinalgError::NotStabilizable(mode) => SynthesisError::InfeasibleBeta {
            beta,
            bound: bound.beta_max,
            mode: Complex::new(mode.re - 0.5 * beta, mode.im),
        },
        other => other.into(),
    })?;
    let riccati_residual = care_residual(&abar, b, &Matrix::identity(n), &x).max_abs();
    let p = inverse(&x)?.symmetrize();
    let k = (&b.transpose() * &x).scale(0.5);
    let lmi = gain_lmi_expression(a, b, &p, beta).symmetrize();
    let lmi_max_eigenvalue = *symmetric_eigenvalues(&lmi)?.last().unwrap();
    if !(lmi_max_eigenvalue < 0.0) {
        return Err(SynthesisError::Certificate(format!(
            "gain inequality largest eigenvalue {lmi_max_eigenvalue:e} is not negative"
        )));
    }
    Ok(GainSolution {
        beta,
        p,
        k,
        lmi_max_eigenvalue,
        riccati_residual,
    })
}

/// `2 / min_i c_i`.
pub fn coupling_threshold(certs: &[TopologyCertificate]) -> f64 {
    let c0 = certs.iter().map(|c| c.c).fold(f64::INFINITY, f64::min);
    2.0 / c0
}

/// `(λ̄_max, τ*)`: the largest generalized eigenvalue over ordered pairs of
/// distinct topologies and the resulting dwell-time threshold
/// `ln(λ̄_max)/β` (zero when `λ̄_max ≤ 1`).
pub fn dwell_threshold(
    certs: &[TopologyCertificate],
    beta: f64,
) -> Result<(f64, f64), SynthesisError> {
    if !(beta > 0.0) {
        return Err(SynthesisError::NonPositiveBeta(beta));
    }
    let mut lambda_bar: f64 = 1.0;
    let mut any_pair = false;
    for (i, ci) in certs.iter().enumerate() {
        for (j, cj) in certs.iter().enumerate() {
            if i != j {
                lambda_bar = if any_pair {
                    lambda_bar.max(max_generalized_eigenvalue(&ci.q, &cj.q)?)
                } else {
                    max_generalized_eigenvalue(&ci.q, &cj.q)?
                };
                any_pair = true;
            }
        }
    }
    let tau = if lambda_bar > 1.0 {
        lambda_bar.ln() / beta
    } else {
        0.0
    };
    Ok((lambda_bar, tau))
}

/// Per-topology certificates, computed independently (in parallel when
/// the `parallel` feature is on).
pub fn topology_certificates(
    graphs: &GraphSet,
    coupling: &CouplingChoice,
) -> Result<Vec<TopologyCertificate>, SynthesisError> {
    if let CouplingChoice::Values(v) = coupling {
        if v.len() != graphs.len() {
            return Err(SynthesisError::CouplingCount {
                expected: graphs.len(),
                got: v.len(),
            });
        }
    }
    let indexed: Vec<usize> = (0..graphs.len()).collect();
    par::map(&indexed, |&i| {
        let g = &graphs.graphs()[i];
        let r = topology::reduced_laplacian(g)?.with_source(i);
        let margin = r.antistability_margin()?;
        if !(margin > 0.0) {
            return Err(SynthesisError::NoSpanningTree { index: i, margin });
        }
        let c = match coupling {
            CouplingChoice::Fraction(f) => choose_c(margin, *f)?,
            CouplingChoice::Values(v) => v[i],
        };
        solve_topology_lmi(&r, c)
    })
    .into_iter()
    .collect()
}

/// Full design: certificates, gain, coupling strength and dwell threshold.
pub fn synthesize(
    a: &Matrix,
    b: &Matrix,
    graphs: &GraphSet,
    params: &SynthesisParams,
) -> Result<GainDesign, SynthesisError> {
    let certificates = topology_certificates(graphs, &params.coupling)?;
    let gain = solve_gain_lmi(a, b, params.beta)?;
    let feasibility = max_feasible_beta(a, b)?;
    let alpha_min = coupling_threshold(&certificates);
    let alpha = match params.alpha {
        AlphaChoice::Value(v) => v,
        AlphaChoice::MarginFactor(f) => f * alpha_min,
    };
    if !(alpha > alpha_min) {
        return Err(SynthesisError::CouplingStrength { alpha, alpha_min });
    }
    let (lambda_bar_max, dwell) = dwell_threshold(&certificates, params.beta)?;
    let c0 = certificates
        .iter()
        .map(|c| c.c)
        .fold(f64::INFINITY, f64::min);
    Ok(GainDesign {
        beta: params.beta,
        p: gain.p,
        k: gain.k,
        alpha,
        alpha_min,
        c0,
        certificates,
        lambda_bar_max,
        dwell_threshold: dwell,
        gain_lmi_max_eigenvalue: gain.lmi_max_eigenvalue,
        feasibility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::DirectedGraph;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_rows(&[[v]]).unwrap()
    }

    fn reduced(m: Matrix) -> ReducedLaplacian {
        ReducedLaplacian {
            matrix: m,
            source: None,
        }
    }

    #[test]
    fn choose_c_examples() {
        assert!((choose_c(1.0, 0.9).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(choose_c(2.0, 0.5).unwrap(), 1.0);
        assert!(choose_c(0.0, 0.5).is_err());
        assert!(choose_c(-1.0, 0.5).is_err());
    }

    #[test]
    fn topology_lmi_scalar_and_identity() {
        let cert = solve_topology_lmi(&reduced(scalar(2.0)), 1.0).unwrap();
        assert!((cert.q[(0, 0)] - 0.5).abs() < 1e-15);
        let cert = solve_topology_lmi(&reduced(Matrix::identity(4)), 0.5).unwrap();
        assert!(cert.q.max_diff(&Matrix::identity(4)) < 1e-14);
        assert!((cert.lmi_margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn topology_lmi_rejects_large_c() {
        assert!(matches!(
            solve_topology_lmi(&reduced(Matrix::identity(2)), 1.0),
            Err(SynthesisError::CouplingTooLarge { .. })
        ));
        assert!(matches!(
            solve_topology_lmi(&reduced(Matrix::zeros(2, 2)), 0.1),
            Err(SynthesisError::NoSpanningTree { .. })
        ));
    }

    #[test]
    fn scalar_gain_lmi() {
        let g = solve_gain_lmi(&scalar(0.0), &scalar(1.0), 2.0).unwrap();
        let r2 = 2f64.sqrt();
        assert!((g.p[(0, 0)] - (r2 - 1.0)).abs() < 1e-12);
        assert!((g.k[(0, 0)] - 0.5 * (1.0 + r2)).abs() < 1e-12);
        let expect = -(r2 - 1.0).powi(2);
        assert!((g.lmi_max_eigenvalue - expect).abs() < 1e-12);
    }

    #[test]
    fn uncontrollable_mode_limits_beta() {
        let a = Matrix::from_diag(&[-1.0, 0.0]);
        let b = Matrix::column(&[0.0, 1.0]).unwrap();
        let bound = max_feasible_beta(&a, &b).unwrap();
        assert!((bound.beta_max - 1.0).abs() < 1e-12);
        match solve_gain_lmi(&a, &b, 3.0) {
            Err(SynthesisError::InfeasibleBeta { mode, bound, .. }) => {
                assert!((mode.re + 1.0).abs() < 1e-12);
                assert!((bound - 1.0).abs() < 1e-12);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        let ok = solve_gain_lmi(&a, &b, 0.5).unwrap();
        assert!(ok.lmi_max_eigenvalue < 0.0);
    }

    #[test]
    fn controllable_pair_has_no_bound() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let b = Matrix::column(&[0.0, 1.0]).unwrap();
        assert_eq!(max_feasible_beta(&a, &b).unwrap().beta_max, f64::INFINITY);
        for beta in [0.1, 1.0, 10.0, 50.0] {
            assert!(solve_gain_lmi(&a, &b, beta).is_ok(), "β = {beta}");
        }
    }

    fn cert_with_c(c: f64) -> TopologyCertificate {
        TopologyCertificate {
            index: 0,
            c,
            q: Matrix::identity(2),
            lmi_margin: 1.0,
            antistability_margin: 1.0,
        }
    }

    #[test]
    fn alpha_threshold_examples() {
        assert_eq!(
            coupling_threshold(&[cert_with_c(0.25), cert_with_c(0.25)]),
            8.0
        );
        assert_eq!(coupling_threshold(&[cert_with_c(1.0)]), 2.0);
        assert_eq!(
            coupling_threshold(&[cert_with_c(0.5), cert_with_c(0.1)]),
            20.0
        );
    }

    #[test]
    fn dwell_threshold_degenerate_cases() {
        let (l, t) = dwell_threshold(&[cert_with_c(0.5)], 3.0).unwrap();
        assert_eq!((l, t), (1.0, 0.0));
        let (l, t) = dwell_threshold(&[cert_with_c(0.5), cert_with_c(0.5)], 3.0).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
        assert_eq!(t, 0.0);
        let mut other = cert_with_c(0.5);
        other.q = Matrix::from_diag(&[1.0, 4.0]);
        let (l, t) = dwell_threshold(&[cert_with_c(0.5), other], 2.0).unwrap();
        assert!((l - 4.0).abs() < 1e-13);
        assert!((t - 4f64.ln() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn synthesize_rejects_graph_without_tree() {
        let good = DirectedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let bad = DirectedGraph::empty(3).unwrap();
        let set = GraphSet::new(vec![good, bad]).unwrap();
        let a = scalar(0.0);
        let b = scalar(1.0);
        let err = synthesize(&a, &b, &set, &SynthesisParams::default()).unwrap_err();
        assert!(matches!(
            err,
            SynthesisError::NoSpanningTree { index: 1, .. }
        ));
    }

    #[test]
    fn synthesize_rejects_small_alpha() {
        let g = DirectedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let set = GraphSet::new(vec![g]).unwrap();
        let params = SynthesisParams {
            beta: 1.0,
            coupling: CouplingChoice::Values(vec![0.5]),
            alpha: AlphaChoice::Value(4.0),
        };
        let err = synthesize(&scalar(0.0), &scalar(1.0), &set, &params).unwrap_err();
        assert!(matches!(err, SynthesisError::CouplingStrength { .. }));
    }
}
