//! The pipeline commands. Each one prints a human-readable summary, writes
//! its artifacts into the output directory and reports pass or fail.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use switchcons::demo::{self, Vtol};
use switchcons::linalg::{eigenvalues, Complex, Matrix};
use switchcons::simulator::{
    build_closed_loop, consensus_verdict, lyapunov_monitor, random_initial_state, simulate,
    write_csv, ConsensusVerdict, SimError,
};
use switchcons::synthesis::{
    check_schedule, max_feasible_beta, synthesize as design_gain, verify_report, ReferenceValues,
    SynthesisError, SynthesisReport, VerificationReport,
};
use switchcons::topology::{reduced_laplacian, SwitchingSignal};

use crate::config::{
    AlphaSpec, CouplingSpec, GraphFile, GraphSpec, Loaded, PeriodicSpec, RunConfig, SimulationSpec,
    SwitchingSpec, SynthesisSpec, SystemSpec, CONFIG_SCHEMA_VERSION,
};
use crate::{CliError, Status};

pub const ANALYSIS_FILE: &str = "analysis.json";
pub const REPORT_FILE: &str = "report.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const VERDICT_FILE: &str = "verdict.json";
pub const VERIFICATION_FILE: &str = "verification.json";

/// Where a command reads and writes its files.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub out_dir: PathBuf,
    pub report_path: PathBuf,
}

impl Workspace {
    /// `--out` wins over `output.dir`, which wins over `./out`. The report
    /// lives at `report` when the config names it.
    pub fn new(loaded: &Loaded, out_flag: Option<&Path>) -> Self {
        let out_dir = match (out_flag, &loaded.config.output) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(o)) => loaded.resolve(&o.dir),
            (None, None) => PathBuf::from("out"),
        };
        let report_path = match &loaded.config.report {
            Some(p) => loaded.resolve(p),
            None => out_dir.join(REPORT_FILE),
        };
        Self {
            out_dir,
            report_path,
        }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> Result<(), CliError> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| CliError::Input(format!("stdout: {e}")))
}

fn fmt_matrix(m: &Matrix) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.6}")).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn fmt_spectrum(s: &[Complex]) -> String {
    let parts: Vec<String> = s.iter().map(|z| format!("{z:.6}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn synthesis_error(e: SynthesisError) -> CliError {
    match e {
        SynthesisError::CouplingCount { .. }
        | SynthesisError::NonPositiveBeta(_)
        | SynthesisError::Topology(_) => CliError::Input(e.to_string()),
        other => CliError::Infeasible(other.to_string()),
    }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Dimension(_) | SimError::Parameter(_) | SimError::Topology(_) => {
            CliError::Input(e.to_string())
        }
        other => CliError::Infeasible(other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphAnalysis {
    /// 1-based.
    pub graph: usize,
    pub spanning_tree: bool,
    /// 1-based root of a spanning tree.
    pub root: Option<usize>,
    pub laplacian_spectrum: Vec<Complex>,
    pub reduced_laplacian: Matrix,
    pub antistability_margin: f64,
}

pub fn analyze_graphs(loaded: &Loaded) -> Result<Vec<GraphAnalysis>, CliError> {
    loaded
        .graphs
        .graphs()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let red = reduced_laplacian(g)
                .map_err(|e| CliError::Input(format!("graph {}: {e}", i + 1)))?;
            let margin = red
                .antistability_margin()
                .map_err(|e| CliError::Infeasible(format!("graph {}: {e}", i + 1)))?;
            let spectrum = eigenvalues(&g.laplacian())
                .map_err(|e| CliError::Infeasible(format!("graph {}: {e}", i + 1)))?;
            Ok(GraphAnalysis {
                graph: i + 1,
                spanning_tree: g.has_spanning_tree(),
                root: g.spanning_tree_root().map(|r| r + 1),
                laplacian_spectrum: spectrum.eigenvalues,
                reduced_laplacian: red.matrix,
                antistability_margin: margin,
            })
        })
        .collect()
}

pub fn analyze(loaded: &Loaded, ws: &Workspace, out: &mut dyn Write) -> Result<Status, CliError> {
    let rows = analyze_graphs(loaded)?;
    for r in &rows {
        let tree = match r.root {
            Some(root) => format!("spanning tree rooted at node {root}"),
            None => "no spanning tree".to_string(),
        };
        say(
            out,
            format!(
                "graph {}: {tree}, antistability margin {}",
                r.graph, r.antistability_margin
            ),
        )?;
        say(
            out,
            format!(
                "  Laplacian spectrum {}",
                fmt_spectrum(&r.laplacian_spectrum)
            ),
        )?;
        say(
            out,
            format!("  reduced Laplacian {}", fmt_matrix(&r.reduced_laplacian)),
        )?;
    }
    write_json(&ws.file(ANALYSIS_FILE), &rows)?;
    if rows.iter().all(|r| r.spanning_tree) {
        Ok(Status::Pass)
    } else {
        let bad: Vec<String> = rows
            .iter()
            .filter(|r| !r.spanning_tree)
            .map(|r| r.graph.to_string())
            .collect();
        Err(CliError::Infeasible(format!(
            "graph {} has no directed spanning tree",
            bad.join(", ")
        )))
    }
}

pub fn build_report(
    loaded: &Loaded,
    signal: Option<&SwitchingSignal>,
    reference: Option<ReferenceValues>,
) -> Result<SynthesisReport, CliError> {
    let cfg = &loaded.config;
    let design = design_gain(
        &cfg.system.a,
        &cfg.system.b,
        &loaded.graphs,
        &cfg.synthesis_params(),
    )
    .map_err(synthesis_error)?;
    let mut report = SynthesisReport::from_design(&design);
    report.input_hash = Some(loaded.digest());
    if let Some(sig) = signal {
        let sched = check_schedule(sig, &design.certificates, design.beta, cfg.synthesis.kappa0)
            .map_err(synthesis_error)?;
        report.schedule = Some(sched);
    }
    report.reference = reference;
    Ok(report)
}

fn print_bound(loaded: &Loaded, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let bound = max_feasible_beta(&cfg.system.a, &cfg.system.b)
        .map_err(|e| CliError::Infeasible(e.to_string()))?;
    let text = if bound.beta_max.is_finite() {
        format!(
            "feasible for β < {} (limited by mode {})",
            bound.beta_max,
            bound.limiting_mode().unwrap_or_default()
        )
    } else {
        "feasible for every β > 0 (controllable pair)".to_string()
    };
    say(out, format!("feasibility: {text}"))
}

pub fn synthesize(
    loaded: &Loaded,
    ws: &Workspace,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let signal = loaded.signal()?;
    let report = match build_report(loaded, signal.as_ref(), None) {
        Ok(r) => r,
        Err(e) => {
            if matches!(e, CliError::Infeasible(_)) {
                let _ = print_bound(loaded, out);
            }
            return Err(e);
        }
    };
    print_report(&report, out)?;
    print_bound(loaded, out)?;
    write_file(
        &ws.report_path,
        format!("{}\n", report.to_json()).as_bytes(),
    )?;
    say(
        out,
        format!("report written to {}", ws.report_path.display()),
    )?;
    Ok(Status::Pass)
}

fn print_report(r: &SynthesisReport, out: &mut dyn Write) -> Result<(), CliError> {
    say(out, format!("β = {}", r.beta))?;
    say(out, format!("K = {}", fmt_matrix(&r.k)))?;
    say(
        out,
        format!("α = {} (α_min = 2/c₀ = {:?})", r.alpha, r.alpha_min),
    )?;
    say(
        out,
        format!(
            "gain inequality largest eigenvalue {:e}",
            r.gain_lmi_max_eigenvalue
        ),
    )?;
    say(
        out,
        format!(
            "λ̄_max = {}, dwell threshold τ* = {}",
            r.lambda_bar_max, r.dwell_threshold
        ),
    )?;
    if let Some(s) = &r.schedule {
        let verdict = if s.passed { "satisfied" } else { "violated" };
        let min = s
            .min_margin()
            .map_or("none".to_string(), |m| format!("{m}"));
        say(
            out,
            format!(
                "switching condition {verdict} ({} switches, min margin {min})",
                s.intervals.len()
            ),
        )?;
    }
    Ok(())
}

fn read_report(ws: &Workspace) -> Result<SynthesisReport, CliError> {
    let p = &ws.report_path;
    let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
    SynthesisReport::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub gain_source: String,
    pub alpha: f64,
    pub samples: usize,
    pub verdict: ConsensusVerdict,
}

pub fn simulate_run(
    loaded: &Loaded,
    ws: &Workspace,
    out: &mut dyn Write,
) -> Result<(Status, Option<SimulationSummary>), CliError> {
    let cfg = &loaded.config;
    let signal = loaded
        .signal()?
        .ok_or_else(|| CliError::Input("simulate needs a switching section".into()))?;
    let sim = cfg
        .simulation
        .as_ref()
        .ok_or_else(|| CliError::Input("simulate needs a simulation section".into()))?;
    let (k, alpha, report, source) = match &cfg.gain {
        Some(g) => (g.k.clone(), g.alpha, None, "config".to_string()),
        None => {
            let r = read_report(ws)?;
            let alpha = match cfg.synthesis.alpha {
                AlphaSpec::Value(a) => a,
                AlphaSpec::MarginFactor(_) => r.alpha,
            };
            (
                r.k.clone(),
                alpha,
                Some(r),
                ws.report_path.display().to_string(),
            )
        }
    };
    let cl = build_closed_loop(
        &cfg.system.a,
        &cfg.system.b,
        &k,
        alpha,
        &loaded.graphs,
        &signal,
    )
    .map_err(sim_error)?;
    let dim = loaded.agents() * cfg.system.a.rows();
    let x0 = match (&sim.x0, sim.seed) {
        (Some(x), _) => {
            if x.len() != dim {
                return Err(CliError::Input(format!(
                    "simulation.x0 has {} entries, expected {dim}",
                    x.len()
                )));
            }
            x.clone()
        }
        (None, Some(seed)) => random_initial_state(seed, dim),
        (None, None) => unreachable!("validated config"),
    };
    say(out, format!("gain from {source}, α = {alpha}"))?;
    let tr = match simulate(&cl, &x0, sim.dt) {
        Ok(tr) => tr,
        Err(SimError::Divergence { t, norm }) => {
            say(out, format!("diverged at t = {t} (‖x‖ = {norm:e})"))?;
            say(out, "consensus: no")?;
            return Ok((Status::Fail, None));
        }
        Err(e) => return Err(sim_error(e)),
    };
    let monitor = match &report {
        Some(r) => Some(lyapunov_monitor(&tr, &r.certificates(), &r.p).map_err(sim_error)?),
        None => None,
    };
    let mut csv = Vec::new();
    write_csv(&tr, monitor.as_ref(), &mut csv).map_err(|e| CliError::Input(e.to_string()))?;
    write_file(&ws.file(TRAJECTORY_FILE), &csv)?;
    let verdict = consensus_verdict(&tr, sim.tolerance, sim.window);
    let summary = SimulationSummary {
        gain_source: source,
        alpha,
        samples: tr.len(),
        verdict,
    };
    write_json(&ws.file(VERDICT_FILE), &summary)?;
    let v = &summary.verdict;
    say(
        out,
        format!(
            "‖e(T)‖/‖e(0)‖ = {:e} (tolerance {:e}), max pairwise distance {:e}",
            v.ratio, v.tolerance, v.max_pairwise_distance
        ),
    )?;
    say(
        out,
        format!("consensus: {}", if v.passed { "yes" } else { "no" }),
    )?;
    say(
        out,
        format!(
            "trajectory written to {}",
            ws.file(TRAJECTORY_FILE).display()
        ),
    )?;
    let status = if v.passed { Status::Pass } else { Status::Fail };
    Ok((status, Some(summary)))
}

pub fn simulate_cmd(
    loaded: &Loaded,
    ws: &Workspace,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    simulate_run(loaded, ws, out).map(|(s, _)| s)
}

pub fn verify_run(
    loaded: &Loaded,
    ws: &Workspace,
    out: &mut dyn Write,
) -> Result<VerificationReport, CliError> {
    let cfg = &loaded.config;
    let report = read_report(ws)?;
    let digest = loaded.digest();
    match &report.input_hash {
        Some(h) if *h == digest => {}
        Some(h) => {
            return Err(CliError::Input(format!(
                "report {} is stale: input hash {h} does not match the configuration ({digest})",
                ws.report_path.display()
            )))
        }
        None => return Err(CliError::Input("report carries no input hash".into())),
    }
    let signal = loaded.signal()?;
    if signal.is_none() {
        say(out, "no switching section: per-switch conditions skipped")?;
    }
    let vr = verify_report(
        &report,
        &cfg.system.a,
        &cfg.system.b,
        &loaded.graphs,
        signal.as_ref(),
        cfg.synthesis.kappa0,
    )
    .map_err(synthesis_error)?;
    for item in &vr.items {
        let tag = if item.passed { "PASS" } else { "FAIL" };
        if item.detail.is_empty() {
            say(out, format!("{tag} {}", item.name))?;
        } else {
            say(out, format!("{tag} {}: {}", item.name, item.detail))?;
        }
    }
    let failed = vr.failures().count();
    say(
        out,
        format!(
            "{} of {} checks passed",
            vr.items.len() - failed,
            vr.items.len()
        ),
    )?;
    write_json(&ws.file(VERIFICATION_FILE), &vr)?;
    Ok(vr)
}

pub fn verify(loaded: &Loaded, ws: &Workspace, out: &mut dyn Write) -> Result<Status, CliError> {
    let vr = verify_run(loaded, ws, out)?;
    Ok(if vr.passed {
        Status::Pass
    } else {
        Status::Fail
    })
}

pub const DEMO_CONFIG_FILE: &str = "vtol.json";
const DEMO_GRAPH_FILES: [&str; 2] = ["g1.json", "g2.json"];

/// Configuration of the built-in example: β = 3, c₁ = c₂ = 0.25, α = 8.1,
/// round-robin every 0.5 s over 10 s from the recorded seed.
pub fn demo_config(graphs: Vec<GraphSpec>) -> RunConfig {
    let v = Vtol::load();
    let r = &v.reference;
    RunConfig {
        schema_version: CONFIG_SCHEMA_VERSION,
        system: SystemSpec {
            a: v.a.clone(),
            b: v.b.clone(),
        },
        graphs,
        switching: Some(SwitchingSpec::Periodic(PeriodicSpec {
            dwell: r.switching_dwell,
            horizon: demo::HORIZON,
        })),
        synthesis: SynthesisSpec {
            beta: r.beta,
            c: CouplingSpec::Values(r.c.clone()),
            alpha: AlphaSpec::Value(r.alpha),
            ..SynthesisSpec::default()
        },
        simulation: Some(SimulationSpec {
            seed: Some(demo::SEED),
            x0: None,
            dt: demo::DT,
            tolerance: 1e-2,
            window: 1.0,
        }),
        gain: None,
        report: None,
        output: None,
    }
}

fn row(
    out: &mut dyn Write,
    name: &str,
    computed: String,
    reference: String,
) -> Result<(), CliError> {
    say(out, format!("  {name:<26} {computed:>14} {reference:>14}"))
}

/// Emits the graphs and a config into `out_dir`, then runs the four
/// commands on that config and compares against the published values.
pub fn demo_vtol(out_dir: &Path, out: &mut dyn Write) -> Result<Status, CliError> {
    let v = Vtol::load();
    let mut specs = Vec::new();
    for (g, name) in v.graphs.graphs().iter().zip(DEMO_GRAPH_FILES) {
        write_file(&out_dir.join(name), format!("{}\n", g.to_json()).as_bytes())?;
        specs.push(GraphSpec::File(GraphFile { path: name.into() }));
    }
    let cfg = demo_config(specs);
    let cfg_path = out_dir.join(DEMO_CONFIG_FILE);
    write_file(&cfg_path, format!("{}\n", cfg.to_json()).as_bytes())?;
    say(
        out,
        format!("graphs and configuration written to {}", out_dir.display()),
    )?;

    let loaded = Loaded::from_file(&cfg_path, &Default::default())?;
    let ws = Workspace::new(&loaded, Some(out_dir));
    let mut ok = true;

    say(out, "== analyze")?;
    ok &= analyze(&loaded, &ws, out)? == Status::Pass;
    let rows = analyze_graphs(&loaded)?;
    let laplacians_match = rows
        .iter()
        .zip(&v.reference.reduced_laplacians)
        .all(|(r, m)| r.reduced_laplacian == *m);
    say(
        out,
        format!(
            "reduced Laplacians {} the published matrices",
            if laplacians_match {
                "match"
            } else {
                "differ from"
            }
        ),
    )?;
    ok &= laplacians_match;

    say(out, "== synthesize")?;
    let signal = loaded.signal()?;
    let report = build_report(&loaded, signal.as_ref(), Some(v.reference_values()))?;
    print_report(&report, out)?;
    write_file(
        &ws.report_path,
        format!("{}\n", report.to_json()).as_bytes(),
    )?;

    say(out, "== simulate")?;
    let (sim_status, summary) = simulate_run(&loaded, &ws, out)?;
    ok &= sim_status == Status::Pass;

    say(out, "== simulate with the published gain")?;
    let published = simulate_published(&loaded, &v)?;
    say(out, format!("‖e(T)‖/‖e(0)‖ = {:e}", published.ratio))?;
    ok &= published.passed;

    say(out, "== verify")?;
    let vr = verify_run(&loaded, &ws, out)?;
    ok &= vr.passed;

    let r = &v.reference;
    say(out, "== computed vs published")?;
    row(out, "quantity", "computed".into(), "published".into())?;
    row(
        out,
        "α_min",
        format!("{:?}", report.alpha_min),
        format!("{:?}", r.alpha_min),
    )?;
    row(
        out,
        "λ̄_max",
        format!("{:.4}", report.lambda_bar_max),
        format!("{:.4}", r.lambda_bar_max),
    )?;
    row(
        out,
        "τ*",
        format!("{:.4}", report.dwell_threshold),
        format!("{:.4}", r.dwell_threshold),
    )?;
    row(
        out,
        "K[0][0]",
        format!("{:.4}", report.k[(0, 0)]),
        format!("{:.4}", r.k[(0, 0)]),
    )?;
    if let Some(s) = &summary {
        row(
            out,
            "consensus ratio (our K)",
            format!("{:.3e}", s.verdict.ratio),
            "-".into(),
        )?;
    }
    row(
        out,
        "consensus ratio (their K)",
        format!("{:.3e}", published.ratio),
        "-".into(),
    )?;
    say(out, format!("note: {}", v.reference_values().note))?;
    say(
        out,
        format!("demo {}", if ok { "passed" } else { "FAILED" }),
    )?;
    Ok(if ok { Status::Pass } else { Status::Fail })
}

fn simulate_published(loaded: &Loaded, v: &Vtol) -> Result<ConsensusVerdict, CliError> {
    let cfg = &loaded.config;
    let sim = cfg.simulation.as_ref().expect("demo config simulates");
    let signal = loaded.signal()?.expect("demo config switches");
    let cl = build_closed_loop(
        &v.a,
        &v.b,
        &v.reference.k,
        v.reference.alpha,
        &v.graphs,
        &signal,
    )
    .map_err(sim_error)?;
    let x0 = random_initial_state(demo::SEED, cl.agents() * cl.state_dim());
    let tr = simulate(&cl, &x0, sim.dt).map_err(sim_error)?;
    Ok(consensus_verdict(&tr, sim.tolerance, sim.window))
}
