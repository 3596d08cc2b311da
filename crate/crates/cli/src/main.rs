use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use switchcons_cli::config::Overrides;
use switchcons_cli::{run, Command, Options};

#[derive(Parser)]
#[command(
    name = "switchcons",
    version,
    about = "Consensus protocol synthesis over switching directed graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random initial state; replaces `simulation.x0`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Round-robin dwell time in seconds; replaces the switching schedule.
    #[arg(long, global = true)]
    dwell: Option<f64>,
    /// Decay rate of the gain inequality.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Coupling strength.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Required margin in the per-switch condition.
    #[arg(long, global = true)]
    kappa0: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spanning trees, spectra and reduced Laplacians of the graphs.
    Analyze,
    /// Feedback gain, coupling strength and dwell threshold.
    Synthesize,
    /// Exact closed-loop trajectory and consensus verdict.
    Simulate,
    /// Re-check a synthesis report against the configuration.
    Verify,
    /// Full pipeline on the built-in VTOL example.
    DemoVtol,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let command = match cli.command {
        Cmd::Analyze => Command::Analyze,
        Cmd::Synthesize => Command::Synthesize,
        Cmd::Simulate => Command::Simulate,
        Cmd::Verify => Command::Verify,
        Cmd::DemoVtol => Command::DemoVtol,
    };
    let opts = Options {
        config: cli.config,
        out: cli.out,
        overrides: Overrides {
            seed: cli.seed,
            dwell: cli.dwell,
            beta: cli.beta,
            alpha: cli.alpha,
            kappa0: cli.kappa0,
        },
    };
    let mut stdout = std::io::stdout().lock();
    let code = match run(command, &opts, &mut stdout) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("switchcons: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
