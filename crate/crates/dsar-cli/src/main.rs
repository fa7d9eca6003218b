//! `dsar`: config-driven runner for the Doppler-SAR laboratory.
//!
//! Subcommands: `simulate` (form data and write a DSAR1 grid), `image`
//! (backproject a grid with beam forming and emit metrics), `analyze`
//! (canonical-relation analysis reports), `verify` (seeded invariant suites).
//!
//! Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 I/O error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dsar_core::DsarError;

#[derive(Parser)]
#[command(name = "dsar", version, about = "Doppler-SAR simulation, imaging, and canonical analysis")]
struct Cli {
    /// Scenario configuration file (JSON, schema dsar-config/1).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides the config's output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores). Results are identical for any value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Seed for sampled verifications; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Form data for the configured scenario and write DSAR1 + CSV files.
    Simulate,
    /// Backproject a DSAR1 grid file into an image and write PGM/CSV/metrics.
    Image {
        /// Path to the data grid produced by `simulate`.
        datagrid: PathBuf,
    },
    /// Locate and classify projection degeneracies; write JSON/CSV reports.
    Analyze,
    /// Run a verification suite (or `all`) and report per-check margins.
    Verify {
        /// One of the named suites, or `all`.
        suite: String,
    },
}

/// Failure with its process exit code.
pub enum CliError {
    /// Usage or configuration problem (exit 2).
    Usage(String),
    /// A verification or numerical check failed (exit 1).
    Check(String),
    /// File system or format problem (exit 3).
    Io(String),
}

impl From<DsarError> for CliError {
    fn from(e: DsarError) -> Self {
        match e {
            DsarError::InvalidArgument(m) => CliError::Usage(m),
            DsarError::Numerical(m) => CliError::Check(m),
            DsarError::Format(m) => CliError::Io(m),
            DsarError::Io(m) => CliError::Io(m.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Check(m) | CliError::Io(m) => m,
        }
    }
}

fn require_config(cli: &Cli) -> Result<(config::ScenarioConfig, PathBuf), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("this subcommand needs --config <FILE>".to_string()))?;
    let cfg = config::ScenarioConfig::load(path)?;
    let dir = path.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, dir))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate => {
            let (cfg, cfg_dir) = require_config(cli)?;
            let mut resolved = cfg.resolve(&cfg_dir)?;
            if let Some(out) = &cli.out {
                resolved.output_dir = out.clone();
            }
            if let Some(seed) = cli.seed {
                resolved.seed = seed;
            }
            commands::simulate::run(&resolved)
        }
        Command::Image { datagrid } => {
            let (cfg, cfg_dir) = require_config(cli)?;
            let mut resolved = cfg.resolve(&cfg_dir)?;
            if let Some(out) = &cli.out {
                resolved.output_dir = out.clone();
            }
            commands::image::run(&resolved, datagrid)
        }
        Command::Analyze => {
            let (cfg, cfg_dir) = require_config(cli)?;
            let mut resolved = cfg.resolve(&cfg_dir)?;
            if let Some(out) = &cli.out {
                resolved.output_dir = out.clone();
            }
            if let Some(seed) = cli.seed {
                resolved.seed = seed;
            }
            commands::analyze::run(&resolved)
        }
        Command::Verify { suite } => {
            let seed = cli.seed.unwrap_or(0);
            commands::verify::run(suite, seed, cli.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: failed to build thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
