//! Command-line front end.
//!
//! Every subcommand reads one TOML experiment file (see [`config`]) and
//! writes CSV files, each starting with a `# config_sha256=... seed=...`
//! line, into the output directory (`--out`, else `output.dir`, else `out`).
//!
//! Exit codes: 0 success, 1 internal or I/O error, 2 configuration error,
//! 3 data error, 4 hypothesis gate (e.g. `rates` on a profile that fails the
//! upper decay check, or `lowerbound` on one failing the lower check).

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use commands::{Context, Outcome};
use config::ExperimentConfig;
use output::RunStamp;

#[derive(Debug, Parser)]
#[command(name = "specreg", version, about = "Spectral-regularization kernel regression experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues, F/G tables, effective dimension and structural checks.
    SpectrumReport(Common),
    /// One estimator fit on synthetic data or a two-column `x,y` CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Monte-Carlo convergence over the `[rates]` grid.
    Rates {
        #[command(flatten)]
        common: Common,
        /// Also write `rates.svg`.
        #[arg(long)]
        svg: bool,
    },
    /// Fano lower-bound instances for each `s` in `[lowerbound]`.
    Lowerbound(Common),
    /// Grid verification of the filter constants and qualification.
    FilterCheck(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::SpectrumReport(c) | Command::Lowerbound(c) | Command::FilterCheck(c) => c,
            Command::Fit { common, .. } | Command::Rates { common, .. } => common,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Data(_) => 3,
        Error::Gate(_) => 4,
        _ => 1,
    }
}

fn context(common: &Common) -> Result<Context> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Error::Config(format!("{}: {e}", common.config.display())))?;
    let config = ExperimentConfig::parse(&text)?;
    let out_dir = common
        .out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let jobs = match common.jobs {
        Some(0) => return Err(Error::Config("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    Ok(Context { stamp: RunStamp::new(&text, config.seed), config, out_dir, jobs })
}

pub fn execute(command: &Command) -> Result<Outcome> {
    let ctx = context(command.common())?;
    match command {
        Command::SpectrumReport(_) => commands::spectrum_report(&ctx),
        Command::Fit { data, .. } => commands::fit(&ctx, data.as_deref()),
        Command::Rates { svg, .. } => commands::rates(&ctx, *svg),
        Command::Lowerbound(_) => commands::lowerbound(&ctx),
        Command::FilterCheck(_) => commands::filter_check(&ctx),
    }
}

/// Parses `args`, runs the command, reports on stdout/stderr and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
