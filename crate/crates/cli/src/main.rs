//! `bfb`: solve, optimize and audit the exterior Bernoulli free boundary
//! problem from a JSON configuration.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::OutputDir;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(bfb_core::Error),
    #[error("audit slack violation: {0}")]
    Slack(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<bfb_core::Error> for CliError {
    fn from(e: bfb_core::Error) -> Self {
        match e {
            bfb_core::Error::SlackViolation { link, relative_slack } => {
                CliError::Slack(format!("link {link} has relative slack {relative_slack:.3e}"))
            }
            e => CliError::Solver(e),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Slack(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "bfb", version, about = "Exterior Bernoulli free boundary solver, optimizer and estimate audit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `output_dir` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the summary line.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Solve both state problems and evaluate the energy gap.
    Solve,
    /// Minimize the energy gap over the shape coefficients.
    Optimize,
    /// Audit the boundedness estimates of the Robin state.
    Audit,
    /// Estimate the Poincaré–Friedrichs and trace constants.
    Pf,
    /// Error-versus-h study against the radial solutions.
    Convergence,
    /// Uniform-bound survey over a family of domains.
    Survey,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Optimize => "optimize",
            Command::Audit => "audit",
            Command::Pf => "pf",
            Command::Convergence => "convergence",
            Command::Survey => "survey",
        }
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = RunConfig::load(path)?.resolve()?;
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.raw.output_dir.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set output_dir".into()))?;
    let mut out = OutputDir::new(&dir);
    let result = match cli.command {
        Command::Solve => commands::solve(&cfg, &mut out),
        Command::Optimize => commands::optimize(&cfg, &mut out),
        Command::Audit => commands::audit(&cfg, &mut out),
        Command::Pf => commands::pf(&cfg, &mut out),
        Command::Convergence => commands::convergence(&cfg, &mut out),
        Command::Survey => commands::survey(&cfg, &mut out),
    };
    // A slack violation still leaves a complete report behind.
    if matches!(result, Ok(_) | Err(CliError::Slack(_))) {
        out.finish(cli.command.name())?;
    }
    result.map(|msg| format!("{}: {} ({})", cli.command.name(), msg, commands::describe(&cfg.physics)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(msg) => {
            if !cli.quiet {
                println!("{msg}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bfb {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
