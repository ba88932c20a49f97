//! Command-line front end for the lossy-cavity library.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};
use config::{ModeRange, RunConfig};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lossy-cavity",
    version,
    about = "Resonances, mode weights and output states of a lossy planar cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mode index or inclusive range, e.g. `3` or `1..5`.
    #[arg(long)]
    k: Option<String>,
    /// Suppress the stdout summary.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Complex resonances and loss budget per mode.
    Resonances(Common),
    /// Extraction efficiency and channel weights over time.
    Weights(Common),
    /// Output phase-space functions, fidelity and figures of merit.
    Extract(Common),
    /// Identity and residual checks on the configured stack.
    Verify(Common),
    /// Print the JSON schema of the run configuration.
    #[command(hide = true)]
    Schema,
}

fn context(c: &Common) -> Result<commands::Context, CliError> {
    let (cfg, base) = RunConfig::load(&c.config)?;
    let modes = match &c.k {
        Some(s) => ModeRange::parse(s)?,
        None => cfg.modes,
    };
    let out = c
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|p| base.join(p)))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(commands::Context {
        cfg,
        base,
        out,
        modes,
        quiet: c.quiet,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Resonances(c) => commands::resonances(&context(&c)?),
        Command::Weights(c) => commands::weights(&context(&c)?),
        Command::Extract(c) => commands::extract(&context(&c)?),
        Command::Verify(c) => commands::verify(&context(&c)?),
        Command::Schema => {
            let schema = schemars::schema_for!(RunConfig);
            println!("{}", serde_json::to_string_pretty(&schema)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
