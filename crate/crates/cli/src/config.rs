//! Run configuration: one JSON document describing the agents, the graphs,
//! the switching schedule and the synthesis and simulation settings.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use switchcons::linalg::Matrix;
use switchcons::synthesis::{
    AlphaChoice, CouplingChoice, SynthesisParams, DEFAULT_ALPHA_FACTOR, DEFAULT_C_FRACTION,
    DEFAULT_KAPPA0,
};
use switchcons::topology::{DirectedGraph, GraphDoc, GraphSet, SignalDoc, SwitchingSignal};

use crate::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub system: SystemSpec,
    pub graphs: Vec<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switching: Option<SwitchingSpec>,
    #[serde(default)]
    pub synthesis: SynthesisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSpec>,
    /// Explicit gain; takes precedence over the synthesis report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<GainSpec>,
    /// Synthesis report location; defaults to `report.json` in the output
    /// directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub a: Matrix,
    pub b: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub path: PathBuf,
}

/// A graph file (relative paths resolve against the config file) or an
/// inline graph document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    File(GraphFile),
    Inline(GraphDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicSpec {
    pub dwell: f64,
    pub horizon: f64,
}

/// Breakpoints start at 0; topology indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpec {
    pub breakpoints: Vec<f64>,
    pub indices: Vec<usize>,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SwitchingSpec {
    /// Round-robin over all graphs.
    Periodic(PeriodicSpec),
    Explicit(ExplicitSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSpec {
    Fraction(f64),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaSpec {
    Value(f64),
    MarginFactor(f64),
}

fn default_beta() -> f64 {
    1.0
}

fn default_coupling() -> CouplingSpec {
    CouplingSpec::Fraction(DEFAULT_C_FRACTION)
}

fn default_alpha() -> AlphaSpec {
    AlphaSpec::MarginFactor(DEFAULT_ALPHA_FACTOR)
}

fn default_kappa0() -> f64 {
    DEFAULT_KAPPA0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSpec {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_coupling")]
    pub c: CouplingSpec,
    #[serde(default = "default_alpha")]
    pub alpha: AlphaSpec,
    #[serde(default = "default_kappa0")]
    pub kappa0: f64,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        Self {
            beta: default_beta(),
            c: default_coupling(),
            alpha: default_alpha(),
            kappa0: default_kappa0(),
        }
    }
}

fn default_tolerance() -> f64 {
    1e-2
}

fn default_window() -> f64 {
    1.0
}

/// Exactly one of `seed` and `x0`. The horizon is the switching horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    pub dt: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_window")]
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSpec {
    pub k: Matrix,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

/// Command-line values that replace their config counterparts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dwell: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub kappa0: Option<f64>,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(input(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl RunConfig {
    /// Parses and validates. Errors carry the serde line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(input(format!(
                "config schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let n = self.system.a.rows();
        if self.system.a.cols() != n || n == 0 {
            return Err(input("system.a must be square and non-empty"));
        }
        if self.system.b.rows() != n {
            return Err(input(format!("system.b must have {n} rows")));
        }
        if self.graphs.is_empty() {
            return Err(input("at least one graph is required"));
        }
        positive("synthesis.beta", self.synthesis.beta)?;
        if !(self.synthesis.kappa0 >= 0.0) || !self.synthesis.kappa0.is_finite() {
            return Err(input("synthesis.kappa0 must be non-negative"));
        }
        match &self.synthesis.c {
            CouplingSpec::Fraction(f) if !(*f > 0.0 && *f < 1.0) => {
                return Err(input(format!(
                    "synthesis.c.fraction must lie in (0, 1), got {f}"
                )));
            }
            CouplingSpec::Values(v) if v.len() != self.graphs.len() => {
                return Err(input(format!(
                    "synthesis.c.values has {} entries for {} graphs",
                    v.len(),
                    self.graphs.len()
                )));
            }
            _ => {}
        }
        match self.synthesis.alpha {
            AlphaSpec::Value(a) => positive("synthesis.alpha.value", a)?,
            AlphaSpec::MarginFactor(f) if !(f > 1.0 && f.is_finite()) => {
                return Err(input(format!(
                    "synthesis.alpha.margin_factor must exceed 1, got {f}"
                )));
            }
            _ => {}
        }
        if let Some(sw) = &self.switching {
            match sw {
                SwitchingSpec::Periodic(p) => {
                    positive("switching.periodic.dwell", p.dwell)?;
                    positive("switching.periodic.horizon", p.horizon)?;
                }
                SwitchingSpec::Explicit(e) => {
                    positive("switching.explicit.horizon", e.horizon)?;
                    if let Some(&bad) = e.indices.iter().find(|&&i| i == 0 || i > self.graphs.len())
                    {
                        return Err(input(format!(
                            "switching.explicit.indices: {bad} is not a graph index in 1..={}",
                            self.graphs.len()
                        )));
                    }
                }
            }
        }
        if let Some(sim) = &self.simulation {
            if sim.seed.is_some() == sim.x0.is_some() {
                return Err(input("simulation needs exactly one of seed and x0"));
            }
            positive("simulation.dt", sim.dt)?;
            positive("simulation.tolerance", sim.tolerance)?;
            positive("simulation.window", sim.window)?;
            if let Some(x0) = &sim.x0 {
                if x0.iter().any(|v| !v.is_finite()) {
                    return Err(input("simulation.x0 must be finite"));
                }
            }
        }
        if let Some(g) = &self.gain {
            positive("gain.alpha", g.alpha)?;
            if g.k.rows() != self.system.b.cols() || g.k.cols() != n {
                return Err(input(format!(
                    "gain.k must be {}×{n}",
                    self.system.b.cols()
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(seed) = o.seed {
            let sim = self
                .simulation
                .as_mut()
                .ok_or_else(|| input("--seed needs a simulation section"))?;
            sim.seed = Some(seed);
            sim.x0 = None;
        }
        if let Some(dwell) = o.dwell {
            let horizon = match &self.switching {
                Some(SwitchingSpec::Periodic(p)) => p.horizon,
                Some(SwitchingSpec::Explicit(e)) => e.horizon,
                None => return Err(input("--dwell needs a switching section for the horizon")),
            };
            self.switching = Some(SwitchingSpec::Periodic(PeriodicSpec { dwell, horizon }));
        }
        if let Some(beta) = o.beta {
            self.synthesis.beta = beta;
        }
        if let Some(alpha) = o.alpha {
            self.synthesis.alpha = AlphaSpec::Value(alpha);
            if let Some(g) = &mut self.gain {
                g.alpha = alpha;
            }
        }
        if let Some(k0) = o.kappa0 {
            self.synthesis.kappa0 = k0;
        }
        self.validate()
    }

    pub fn synthesis_params(&self) -> SynthesisParams {
        SynthesisParams {
            beta: self.synthesis.beta,
            coupling: match &self.synthesis.c {
                CouplingSpec::Fraction(f) => CouplingChoice::Fraction(*f),
                CouplingSpec::Values(v) => CouplingChoice::Values(v.clone()),
            },
            alpha: match self.synthesis.alpha {
                AlphaSpec::Value(a) => AlphaChoice::Value(a),
                AlphaSpec::MarginFactor(f) => AlphaChoice::MarginFactor(f),
            },
        }
    }
}

/// A validated configuration with its graphs loaded.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    /// Directory that relative paths in the config resolve against.
    pub base: PathBuf,
    graph_docs: Vec<GraphDoc>,
    pub graphs: GraphSet,
}

impl Loaded {
    pub fn from_file(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut config = RunConfig::from_json(&text)?;
        config.apply(overrides)?;
        Self::new(config, base)
    }

    pub fn new(config: RunConfig, base: PathBuf) -> Result<Self, CliError> {
        let mut graph_docs = Vec::new();
        let mut graphs = Vec::new();
        for (i, entry) in config.graphs.iter().enumerate() {
            let g = match entry {
                GraphSpec::Inline(doc) => DirectedGraph::from_doc(doc),
                GraphSpec::File(f) => {
                    let p = base.join(&f.path);
                    let text = fs::read_to_string(&p).map_err(|e| {
                        input(format!("graph {}: cannot read {}: {e}", i + 1, p.display()))
                    })?;
                    DirectedGraph::from_json(&text)
                }
            }
            .map_err(|e| input(format!("graph {}: {e}", i + 1)))?;
            graph_docs.push(g.to_doc());
            graphs.push(g);
        }
        let graphs = GraphSet::new(graphs).map_err(|e| input(format!("graphs: {e}")))?;
        if graphs.node_count() < 2 {
            return Err(input("graphs need at least two agents"));
        }
        Ok(Self {
            config,
            base,
            graph_docs,
            graphs,
        })
    }

    pub fn agents(&self) -> usize {
        self.graphs.node_count()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    pub fn signal(&self) -> Result<Option<SwitchingSignal>, CliError> {
        let sig = match &self.config.switching {
            None => return Ok(None),
            Some(SwitchingSpec::Periodic(p)) => {
                SwitchingSignal::periodic(self.graphs.len(), p.dwell, p.horizon)
            }
            Some(SwitchingSpec::Explicit(e)) => SwitchingSignal::from_doc(
                &SignalDoc {
                    breakpoints: e.breakpoints.clone(),
                    indices: e.indices.clone(),
                },
                e.horizon,
            ),
        };
        sig.map(Some).map_err(|e| input(format!("switching: {e}")))
    }

    /// SHA-256 over the inputs that determine a synthesis result: the
    /// system, the graphs as loaded, β, the coupling choice and α.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            system: &'a SystemSpec,
            graphs: &'a [GraphDoc],
            beta: f64,
            c: &'a CouplingSpec,
            alpha: &'a AlphaSpec,
        }
        let h = Hashed {
            system: &self.config.system,
            graphs: &self.graph_docs,
            beta: self.config.synthesis.beta,
            c: &self.config.synthesis.c,
            alpha: &self.config.synthesis.alpha,
        };
        let bytes = serde_json::to_vec(&h).expect("digest input serializes");
        format!("{:x}", Sha256::digest(&bytes))
    }
}
