use serde::{Deserialize, Serialize};

use super::{GainDesign, ScheduleReport, TopologyCertificate};
use crate::linalg::{Complex, Matrix};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    /// 1-based topology index.
    pub topology: usize,
    pub c: f64,
    pub q: Matrix,
    pub lmi_margin: f64,
    pub antistability_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityDoc {
    /// `None` stands for `+∞` (controllable pair).
    pub beta_max: Option<f64>,
    pub uncontrollable_modes: Vec<Complex>,
    pub beta_feasible: bool,
}

/// Published values for the built-in example, kept apart from anything
/// computed here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceValues {
    pub k: Matrix,
    pub c: Vec<f64>,
    pub beta: f64,
    pub alpha: f64,
    pub alpha_min: f64,
    pub lambda_bar_max: f64,
    pub dwell_threshold: f64,
    pub switching_dwell: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisReport {
    pub schema_version: u32,
    /// Digest of the configuration that produced the report.
    #[serde(default)]
    pub input_hash: Option<String>,
    pub beta: f64,
    pub alpha: f64,
    pub alpha_min: f64,
    pub c0: f64,
    pub k: Matrix,
    pub p: Matrix,
    pub gain_lmi_max_eigenvalue: f64,
    pub certificates: Vec<CertificateDoc>,
    pub lambda_bar_max: f64,
    pub dwell_threshold: f64,
    pub feasibility: FeasibilityDoc,
    #[serde(default)]
    pub schedule: Option<ScheduleReport>,
    #[serde(default)]
    pub reference: Option<ReferenceValues>,
}

impl SynthesisReport {
    pub fn from_design(design: &GainDesign) -> Self {
        let beta_max = design.feasibility.beta_max;
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            input_hash: None,
            beta: design.beta,
            alpha: design.alpha,
            alpha_min: design.alpha_min,
            c0: design.c0,
            k: design.k.clone(),
            p: design.p.clone(),
            gain_lmi_max_eigenvalue: design.gain_lmi_max_eigenvalue,
            certificates: design
                .certificates
                .iter()
                .map(|c| CertificateDoc {
                    topology: c.index + 1,
                    c: c.c,
                    q: c.q.clone(),
                    lmi_margin: c.lmi_margin,
                    antistability_margin: c.antistability_margin,
                })
                .collect(),
            lambda_bar_max: design.lambda_bar_max,
            dwell_threshold: design.dwell_threshold,
            feasibility: FeasibilityDoc {
                beta_max: beta_max.is_finite().then_some(beta_max),
                uncontrollable_modes: design
                    .feasibility
                    .uncontrollable
                    .iter()
                    .map(|m| m.eigenvalue)
                    .collect(),
                beta_feasible: design.beta < beta_max,
            },
            schedule: None,
            reference: None,
        }
    }

    /// Certificates in library form, ordered as recorded.
    pub fn certificates(&self) -> Vec<TopologyCertificate> {
        self.certificates
            .iter()
            .map(|d| TopologyCertificate {
                index: d.topology.saturating_sub(1),
                c: d.c,
                q: d.q.clone(),
                lmi_margin: d.lmi_margin,
                antistability_margin: d.antistability_margin,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
