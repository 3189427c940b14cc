//! `jjreadout`: runs the readout model from a flat configuration and writes
//! delimited text files.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 numerical failure.

mod commands;
mod config;
mod output;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RawConfig;
use output::Stamp;
use validate::Suite;

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "JJREADOUT_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{what}: {m}")),
            CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
        }
    }
}

impl From<jjreadout_core::Error> for CliError {
    fn from(e: jjreadout_core::Error) -> Self {
        match e {
            jjreadout_core::Error::Parameter(_) | jjreadout_core::Error::Regime(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "jjreadout", version, about = "Josephson-junction qubit readout model")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one key (`key=value`); repeatable, applied in order after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory; overrides `output_dir` and the JJREADOUT_OUT default.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit the wall-clock metadata line so identical inputs give identical files.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bloch-vector length and coherences over the time grid.
    Bloch,
    /// Qubit-projected Wigner surface at the snapshot time.
    Wigner,
    /// Off-diagonal coefficient trajectories.
    Coeffs,
    /// Johnson-Nyquist noise budget of the bias line.
    Dephasing,
    /// Parameter sweep over the `sweep.*` ranges.
    Sweep {
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Run a validation suite and report one line per property.
    Validate {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Print every configuration key with its default.
    Keys,
}

fn load(cli: &Cli) -> Result<config::RunConfig, CliError> {
    let mut raw = RawConfig::default();
    if let Ok(dir) = std::env::var(OUTPUT_ENV) {
        if !dir.is_empty() {
            raw.apply_text(&format!("output_dir = {dir}"), OUTPUT_ENV)?;
        }
    }
    if let Some(path) = &cli.config {
        raw.apply_file(path)?;
    }
    for pair in &cli.set {
        raw.apply_override(pair)?;
    }
    if let Some(dir) = &cli.out {
        raw.set_output_dir(dir);
    }
    raw.resolve()
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::Keys = cli.command {
        for (k, v, doc) in config::KEYS {
            println!("{k} = {v}    # {doc}");
        }
        return Ok(());
    }
    let cfg = load(cli)?;
    cfg.ensure_output_dir()?;
    let stamp = if cli.deterministic { Stamp::Deterministic } else { Stamp::WallClock };
    let written = match &cli.command {
        Command::Bloch => commands::bloch(&cfg, stamp)?,
        Command::Wigner => commands::wigner(&cfg, stamp)?,
        Command::Coeffs => commands::coeffs(&cfg, stamp)?,
        Command::Dephasing => commands::dephasing(&cfg, stamp)?,
        Command::Sweep { jobs } => sweep::run(&cfg, stamp, *jobs)?,
        Command::Validate { suite } => validate::run(&cfg, stamp, *suite)?,
        Command::Keys => unreachable!(),
    };
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jjreadout: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
