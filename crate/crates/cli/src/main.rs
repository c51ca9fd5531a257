//! `cofrag`: configuration-driven runs of the truncated coagulation and
//! multiple-fragmentation solver.
//!
//! Exit status: 0 pass, 1 an enabled check failed, 2 invalid configuration,
//! 3 solver or I/O failure.

mod check;
mod config;
mod converge;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "cofrag", version, about)]
struct Cli {
    /// Output directory, overriding the config's `output_dir`.
    #[arg(long, env = "COFRAG_OUTPUT_DIR", global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration and write snapshots, diagnostics and a manifest.
    Run { config: PathBuf },
    /// Evaluate the kernel hypotheses and write the report.
    Check { config: PathBuf },
    /// Run a refinement ladder and write the convergence table.
    Converge {
        config: PathBuf,
        #[arg(long, value_enum)]
        ladder: converge::Ladder,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
}

fn dispatch(cli: Cli) -> Result<bool> {
    let (Command::Run { config } | Command::Check { config } | Command::Converge { config, .. }) = &cli.command;
    let cfg = RunConfig::load(config)?;
    let dir = config::output_dir(&cfg, config, cli.output_dir.as_deref());
    match cli.command {
        Command::Run { .. } => {
            let outcome = run::execute(&cfg, &dir)?;
            for c in outcome.checks.iter().filter(|c| c.enabled) {
                let status = match (c.applicable, c.pass) {
                    (false, _) => "n/a ",
                    (true, true) => "pass",
                    (true, false) => "FAIL",
                };
                println!("{status} {}: {}", c.name, c.detail);
            }
            Ok(outcome.pass)
        }
        Command::Check { .. } => check::execute(&cfg, &dir),
        Command::Converge { ladder, levels, .. } => converge::execute(&cfg, ladder, levels, &dir),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<ConfigError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
