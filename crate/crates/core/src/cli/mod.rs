//! Batch frontend: `nscert <command> --config FILE [--out DIR] [--threads N] [--seed S]`.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_certify, cmd_convergence, cmd_mesh_info, cmd_project, cmd_run, Context};
pub use config::{parse_config, read_config, ForcingSpec, RunConfig};

use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "nscert", version, about = "Taylor-Hood Navier-Stokes runs with regularity certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (`key = value` lines with `[section]` headers).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the sparse factorization; 1 is serial and bit-reproducible.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Seed for `u0 = random`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand, Clone, PartialEq, Eq)]
pub enum Command {
    /// Advance the scheme and write per-step diagnostics.
    Run,
    /// Run, then evaluate the regularity certificate.
    Certify,
    /// Interpolation, projection and manufactured-solution order tables.
    Convergence {
        /// Cells per side, comma separated; overrides `levels` from the config.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
    },
    /// Stokes Ritz projection of (`u0`, `pressure`).
    Project,
    /// Mesh statistics and VTK export.
    MeshInfo,
}

/// Runs a parsed command line and returns the stdout summary.
pub fn execute(cli: &Cli) -> Result<String> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <file> is required".into()))?;
    let cfg = read_config(path)?;
    if cli.threads == 0 {
        return Err(Error::InvalidArgument("--threads must be at least 1".into()));
    }
    crate::solver::set_threads(cli.threads);
    let ctx = Context {
        out: commands::resolve_out(&cfg, cli.out.as_deref()),
        threads: cli.threads,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Run => cmd_run(&cfg, &ctx),
        Command::Certify => cmd_certify(&cfg, &ctx),
        Command::Convergence { levels } => cmd_convergence(&cfg, &ctx, levels.as_deref()),
        Command::Project => cmd_project(&cfg, &ctx),
        Command::MeshInfo => cmd_mesh_info(&cfg, &ctx),
    }
}

/// Process entry point; verdicts never change the exit status.
pub fn main_entry() -> std::process::ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            print!("{summary}");
            std::process::ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
