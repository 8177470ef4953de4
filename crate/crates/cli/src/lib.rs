//! Batch front end for the `ncphase` binary: configuration loading, command
//! dispatch and report rendering.
//!
//! Exit codes: 0 success, 1 a residual over tolerance or a degenerate
//! structure where an invertible one is required, 2 a configuration or
//! usage error.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "ncphase", version, about = "Checks and simulations for Souriau-form models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Residual tolerance for pass/fail decisions
    #[arg(long, global = true, default_value_t = 1e-5)]
    pub tol: f64,
    /// Probe seed (overrides `probe.seed`)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of probe points (overrides `probe.count`)
    #[arg(long, global = true)]
    pub probes: Option<usize>,
    /// Directory for report.json and trajectory files
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Evaluation point as comma-separated values (brackets, kernel)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Print the JSON report instead of the table
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closedness, jacobiator and antisymmetry residuals
    Check { config: PathBuf },
    /// Table of fundamental brackets at a point
    Brackets { config: PathBuf },
    /// Integrate the equations of motion and report drift
    Simulate { config: PathBuf },
    /// Rank and kernel basis of the form at a point
    Kernel { config: PathBuf },
    /// Reduction of the exotic plane on its degenerate locus
    Reduce { config: PathBuf },
    /// Feynman-Dyson residual suite
    FdCheck { config: PathBuf },
    /// Build the volume-preserving flow and check its divergence
    VolumeFlow { config: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Brackets { .. } => "brackets",
            Command::Simulate { .. } => "simulate",
            Command::Kernel { .. } => "kernel",
            Command::Reduce { .. } => "reduce",
            Command::FdCheck { .. } => "fd-check",
            Command::VolumeFlow { .. } => "volume-flow",
        }
    }

    pub fn config(&self) -> &PathBuf {
        match self {
            Command::Check { config }
            | Command::Brackets { config }
            | Command::Simulate { config }
            | Command::Kernel { config }
            | Command::Reduce { config }
            | Command::FdCheck { config }
            | Command::VolumeFlow { config } => config,
        }
    }
}

/// Why a run did not succeed.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Unreadable or invalid configuration, exit 2.
    Config(String),
    /// Residual over tolerance or degenerate structure, exit 1.
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Check(_) => 1,
            Failure::Config(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Config(m) => m,
        }
    }
}

/// Runs one command, writing the table or JSON to `stdout` and diagnostics
/// to `stderr`; returns the exit code.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32 {
    match commands::execute(cli) {
        Ok(outcome) => {
            let code = outcome.failures.is_empty().then_some(0).unwrap_or(1);
            if let Err(e) = output::emit(&outcome, cli, stdout) {
                let _ = writeln!(stderr, "error: {}", e.message());
                return e.exit_code();
            }
            for f in &outcome.failures {
                let _ = writeln!(stderr, "FAIL {f}");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}
