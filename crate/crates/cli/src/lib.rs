//! Command-line front end for `switchcons`: JSON configuration, the
//! analyze / synthesize / simulate / verify pipeline and the built-in VTOL
//! example.
//!
//! Exit status: 0 pass, 1 verdict failure, 2 infeasible problem or violated
//! assumption, 3 input error.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use config::{Loaded, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 2,
            CliError::Input(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Synthesize,
    Simulate,
    Verify,
    DemoVtol,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub overrides: Overrides,
}

pub fn run(cmd: Command, opts: &Options, out: &mut dyn Write) -> Result<Status, CliError> {
    if cmd == Command::DemoVtol {
        let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        return commands::demo_vtol(&dir, out);
    }
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| CliError::Input("--config is required".into()))?;
    let loaded = Loaded::from_file(path, &opts.overrides)?;
    let ws = commands::Workspace::new(&loaded, opts.out.as_deref());
    match cmd {
        Command::Analyze => commands::analyze(&loaded, &ws, out),
        Command::Synthesize => commands::synthesize(&loaded, &ws, out),
        Command::Simulate => commands::simulate_cmd(&loaded, &ws, out),
        Command::Verify => commands::verify(&loaded, &ws, out),
        Command::DemoVtol => unreachable!(),
    }
}
