use serde::{Deserialize, Serialize};

use super::{
    check_schedule, dwell_threshold, gain_lmi_expression, max_feasible_beta, topology_lmi_margin,
    SynthesisError, SynthesisReport,
};
use crate::linalg::{inverse, is_positive_definite, symmetric_eigenvalues, Matrix};
use crate::topology::{self, GraphSet, SwitchingSignal};

/// Relative tolerance for recomputed scalars against recorded ones.
const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub items: Vec<CheckItem>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.passed)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= CONSISTENCY_TOL * (1.0 + a.abs().max(b.abs()))
}

struct Checks(Vec<CheckItem>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(CheckItem {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

/// Re-validates every certificate of `report` against the raw problem data.
///
/// Nothing recorded in the report is trusted: margins, the gain identity,
/// the coupling bound and the dwell threshold are all recomputed. When a
/// signal is given, every switch is checked against `κ₀`.
pub fn verify_report(
    report: &SynthesisReport,
    a: &Matrix,
    b: &Matrix,
    graphs: &GraphSet,
    signal: Option<&SwitchingSignal>,
    kappa0: f64,
) -> Result<VerificationReport, SynthesisError> {
    let mut checks = Checks(Vec::new());
    let beta = report.beta;

    let count_ok = report.certificates.len() == graphs.len()
        && report
            .certificates
            .iter()
            .enumerate()
            .all(|(i, c)| c.topology == i + 1);
    checks.push(
        "certificate count",
        count_ok,
        format!(
            "{} certificates for {} graphs",
            report.certificates.len(),
            graphs.len()
        ),
    );
    if !count_ok {
        return Ok(finish(checks));
    }

    let mut all_q_spd = true;
    for (i, (g, cert)) in graphs.graphs().iter().zip(&report.certificates).enumerate() {
        let label = i + 1;
        let root = g.spanning_tree_root();
        checks.push(
            format!("topology {label} spanning tree"),
            root.is_some(),
            match root {
                Some(r) => format!("root {}", r + 1),
                None => "no root reaches every node".into(),
            },
        );
        let r = topology::reduced_laplacian(g)?;
        if r.dim() != cert.q.rows() || !cert.q.is_square() {
            checks.push(
                format!("topology {label} Q shape"),
                false,
                "dimension mismatch",
            );
            all_q_spd = false;
            continue;
        }
        let margin = r.antistability_margin()?;
        checks.push(
            format!("topology {label} c below antistability margin"),
            cert.c > 0.0 && cert.c < margin,
            format!("c = {}, margin = {margin}", cert.c),
        );
        let spd = cert.q.asymmetry() <= 1e-9 * (1.0 + cert.q.max_abs())
            && is_positive_definite(&cert.q.symmetrize())?.positive_definite;
        all_q_spd &= spd;
        checks.push(format!("topology {label} Q positive definite"), spd, "");
        let lmi = topology_lmi_margin(&r.matrix, &cert.q, cert.c)?;
        checks.push(
            format!("topology {label} inequality margin"),
            lmi > 0.0,
            format!(
                "smallest eigenvalue {lmi:.6e} (recorded {:.6e})",
                cert.lmi_margin
            ),
        );
    }

    let p_spd = report.p.is_square()
        && report.p.rows() == a.rows()
        && is_positive_definite(&report.p.symmetrize())?.positive_definite;
    checks.push("P positive definite", p_spd, "");
    if p_spd {
        let expr = gain_lmi_expression(a, b, &report.p, beta).symmetrize();
        let top = *symmetric_eigenvalues(&expr)?.last().unwrap();
        checks.push(
            "gain inequality",
            top < 0.0,
            format!("largest eigenvalue {top:.6e}"),
        );
        let expected = (&b.transpose() * &inverse(&report.p)?).scale(0.5);
        let ok_shape = expected.rows() == report.k.rows() && expected.cols() == report.k.cols();
        let diff = if ok_shape {
            expected.max_diff(&report.k)
        } else {
            f64::INFINITY
        };
        checks.push(
            "K identity",
            diff <= 1e-8 * (1.0 + expected.max_abs()),
            format!("max |K − ½BᵀP⁻¹| = {diff:.3e}"),
        );
    }

    let bound = max_feasible_beta(a, b)?;
    checks.push(
        "beta feasible",
        beta > 0.0 && beta < bound.beta_max,
        format!("β = {beta}, bound {}", bound.beta_max),
    );

    let certs = report.certificates();
    let c0 = certs.iter().map(|c| c.c).fold(f64::INFINITY, f64::min);
    let alpha_min = 2.0 / c0;
    checks.push(
        "coupling strength",
        report.alpha > alpha_min && close(alpha_min, report.alpha_min),
        format!(
            "α = {}, 2/c₀ = {alpha_min} (recorded {})",
            report.alpha, report.alpha_min
        ),
    );

    if all_q_spd {
        let (lambda_bar, tau) = dwell_threshold(&certs, beta)?;
        checks.push(
            "dwell threshold",
            close(lambda_bar, report.lambda_bar_max) && close(tau, report.dwell_threshold),
            format!(
                "λ̄_max = {lambda_bar}, τ* = {tau} (recorded {}, {})",
                report.lambda_bar_max, report.dwell_threshold
            ),
        );
        if let Some(s) = signal {
            let sched = check_schedule(s, &certs, beta, kappa0)?;
            if sched.intervals.is_empty() {
                checks.push("switching condition", true, "no switches");
            }
            for m in &sched.intervals {
                checks.push(
                    format!("switch {} condition", m.k),
                    m.passed,
                    format!(
                        "[{}, {}) {}→{} margin {:.6e} vs κ₀ = {kappa0}",
                        m.start, m.end, m.from, m.to, m.margin
                    ),
                );
            }
        }
    }

    Ok(finish(checks))
}

fn finish(checks: Checks) -> VerificationReport {
    let passed = checks.0.iter().all(|c| c.passed);
    VerificationReport {
        items: checks.0,
        passed,
    }
}
