use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

mod commands;
mod config;
mod output;

use config::RunConfig;
use output::Output;

#[derive(Debug, Parser)]
#[command(name = "hitstat", version, about = "Recurrence-time statistics of symbolic sources")]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Report spectrum values in bits instead of nats.
    #[arg(long, global = true)]
    log2: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a symbol stream of the configured source.
    Generate { config: PathBuf },
    /// Exact and estimated recurrence spectra.
    Spectrum { config: PathBuf },
    /// CLT, almost-sure bounds, LIL trace, exponential law and Kac check.
    Fluctuations { config: PathBuf },
    /// Moment growth of hitting times for the Manneville-Pomeau map.
    Mp { config: PathBuf },
    /// Run the acceptance suite.
    Selftest {
        /// Small sample sizes; only checks that the pipeline runs.
        #[arg(long)]
        quick: bool,
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        #[arg(long, default_value_t = hitstat::acceptance::SEED)]
        seed: u64,
        #[arg(long, default_value = "hitstat-out")]
        output_dir: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Io(String),
    #[error(transparent)]
    Library(#[from] hitstat::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use hitstat::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Library(E::DegenerateSource | E::FlatSpectrum) => 4,
            CliError::Library(
                E::InvalidArgument(_) | E::InvalidSpec(_) | E::SizeGuard(_) | E::NotMarkov | E::OutOfRange { .. },
            ) => 2,
            CliError::Library(_) => 1,
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let outcome = match cli.command {
        Command::Selftest {
            quick,
            criteria,
            seed,
            output_dir,
        } => {
            let criteria = if criteria.is_empty() {
                (1..=12).collect()
            } else {
                criteria
            };
            let out = Output::create(&output_dir)?;
            let passed = commands::selftest(quick, &criteria, seed, &out)?;
            return Ok(if passed { 0 } else { 1 });
        }
        Command::Generate { config } => commands::generate(&RunConfig::load(&config)?)?,
        Command::Spectrum { config } => commands::spectrum(&RunConfig::load(&config)?, cli.log2)?,
        Command::Fluctuations { config } => commands::fluctuations(&RunConfig::load(&config)?)?,
        Command::Mp { config } => commands::mp(&RunConfig::load(&config)?)?,
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if outcome.warnings.is_empty() { 0 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers;
    match hitstat::par::with_workers(workers, || run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
