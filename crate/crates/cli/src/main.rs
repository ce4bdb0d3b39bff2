//! Command-line pipeline for graph-encoded Gaussian boson sampling:
//! encode graphs into Gaussian states, enumerate and sample photon-pattern
//! distributions, post-process samples into heavy cliques, fit compact
//! 1-/2-layer beam-splitter circuits, and validate everything against the
//! truncated Fock-space oracle.
//!
//! Exit codes: 0 success, 1 validation failure, 2 input error.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::CliError;
use config::{Overrides, RandomGraphSpec, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gbs", version, about = "Gaussian boson sampling graph-search pipeline")]
struct Cli {
    /// Optional TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Graph instance file (JSON).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,

    /// Random graph spec M,p,seed (e.g. 12,0.5,7).
    #[arg(long, global = true)]
    random: Option<RandomGraphSpec>,

    /// Safety factor t in (0,1) for the rescaling constant c = t / lambda_1.
    #[arg(long = "t", global = true)]
    safety_factor: Option<f64>,

    /// Beam-splitter layers (1 or 2).
    #[arg(long, global = true)]
    layers: Option<usize>,

    /// Number of samples to draw.
    #[arg(long, global = true)]
    shots: Option<u64>,

    /// Photon-count cutoff for distribution enumeration (even).
    #[arg(long = "nmax", global = true)]
    n_max: Option<usize>,

    /// Root seed; all subsystem seeds derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Fock-space cutoff for oracle validation.
    #[arg(long, global = true)]
    cutoff: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a graph: write kernel, covariance, and factorization artifacts.
    Encode,
    /// Enumerate the pattern distribution, draw samples, post-process cliques.
    Sample,
    /// Fit beam-splitter parameters to the reference covariance.
    Fit,
    /// Random-graph scaling study over M in {12,16,20,24} (both layer counts).
    Table1 {
        /// Also run M = 50 (slow).
        #[arg(long)]
        full: bool,
    },
    /// Run the Fock-oracle equivalence and invariant checks.
    Validate {
        /// Covariance artifact to schema-check first.
        #[arg(long)]
        covariance: Option<PathBuf>,
    },
    /// End-to-end docking pipeline: encode, sample, report heavy cliques.
    Dock,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = RunConfig::load_file(cli.config.as_deref()).map_err(CliError::Input)?;
    let flags = Overrides {
        graph: cli.common.graph,
        random: cli.common.random,
        safety_factor: cli.common.safety_factor,
        layers: cli.common.layers,
        n_max: cli.common.n_max,
        shots: cli.common.shots,
        seed: cli.common.seed,
        cutoff: cli.common.cutoff,
        out: cli.common.out,
    };
    let config = RunConfig::resolve(file, &flags).map_err(CliError::Input)?;
    match cli.command {
        Command::Encode => commands::cmd_encode(&config),
        Command::Sample => commands::cmd_sample(&config),
        Command::Fit => commands::cmd_fit(&config),
        Command::Table1 { full } => commands::cmd_table1(&config, full),
        Command::Validate { covariance } => {
            commands::cmd_validate(&config, covariance.as_deref())
        }
        Command::Dock => commands::cmd_dock(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
