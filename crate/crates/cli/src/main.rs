//! `egdef`: scaling degrees, Wick expansions, deformation-space actions,
//! claim verification and dimension tables from the command line.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 invariant violation,
//! 3 oracle or golden-file mismatch.

mod action;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, SessionConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
}

impl From<egdef::Error> for CliError {
    fn from(e: egdef::Error) -> Self {
        match e {
            egdef::Error::Parse(_) => CliError::Usage(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Invariant(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "egdef", version, about = "Counterterm deformations of a Gaussian scalar theory")]
struct Cli {
    /// Session config (`[section]` + `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Emit JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized check (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Symbolic and numeric scaling degree of a kernel, e.g. "|x|^-1 in R^3".
    Sdeg { kernel: String },
    /// Wick expansion of :φ^k1(x1):⋯:φ^kn(xn): with an oracle cross-check.
    Wick {
        #[arg(required = true)]
        powers: Vec<u32>,
        /// Exact point configuration, e.g. "0,0,0;1,0,0".
        #[arg(long)]
        at: Option<String>,
    },
    /// Applies actions (`;`-separated) to a point stored as canonical JSON.
    Deform { point: PathBuf, action: String },
    /// Runs both claim suites and compares the verdicts with the golden files.
    Verify {
        /// Directory holding one `<suite>.json` per claim suite.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Rewrite the golden files from this run.
        #[arg(long)]
        update: bool,
    },
    /// Counterterm dimensions per level and free Lie algebra dimensions.
    Dims {
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
    },
}

fn emit(cli: &Cli, body: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            SessionConfig::parse(&text)?
        }
        None => SessionConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    let report = match &cli.command {
        Command::Deform { point, action } => return emit(cli, &commands::deform(&cfg, point, action)?),
        Command::Sdeg { kernel } => commands::sdeg(&cfg, kernel)?,
        Command::Wick { powers, at } => commands::wick(&cfg, powers, at.as_deref())?,
        Command::Verify { golden, update } => {
            let dir = golden.clone().unwrap_or_else(|| PathBuf::from(&cfg.verify.golden_dir));
            commands::verify(&cfg, &dir, *update)?
        }
        Command::Dims { level, degree } => commands::dims(&cfg, *level, *degree)?,
    };
    let body = if cli.json {
        let mut s = serde_json::to_string_pretty(&report.json).expect("reports are plain JSON");
        s.push('\n');
        s
    } else {
        report.text
    };
    emit(cli, &body)?;
    match report.mismatch {
        Some(m) => Err(CliError::Mismatch(m)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("egdef: {e}");
            ExitCode::from(e.code())
        }
    }
}
