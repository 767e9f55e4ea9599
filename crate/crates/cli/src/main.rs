mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{BoundArgs, CovarianceArgs, DiffuseArgs, ExportArgs, SlicedArgs, VerifyArgs};

/// Spectral diffusion on the sphere: operator checks, covariance and
/// diffusion experiments, score-matching bound checks and sliced Wasserstein
/// distances.
#[derive(Debug, Parser)]
#[command(name = "sphdiff", version)]
struct Cli {
    /// Worker threads (defaults to the number of cores). Outputs do not
    /// depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// JSON configuration. Top-level keys and the section named after the
    /// command override flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the transform, chart and bound operator identities.
    VerifyOperators(VerifyArgs),
    /// Compare the empirical covariance of transformed Brownian motion with Σ.
    Covariance(CovarianceArgs),
    /// Run forward and/or reverse diffusion from a Gaussian test law.
    Diffuse(DiffuseArgs),
    /// Monte Carlo check of the frequency/spatial score-matching bound.
    BoundCheck(BoundArgs),
    /// Sliced Wasserstein distance between two sample files.
    SlicedW(SlicedArgs),
    /// Write the grid and operator matrices.
    Export(ExportArgs),
}

/// Process outcome, mapped onto the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Invalid invocation or input (exit 1).
    Usage(String),
    /// A numerical check did not pass (exit 2).
    Check(String),
    /// Paths produced non-finite values (exit 3).
    Abort(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Check(_) => 2,
            Failure::Abort(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Check(m) | Failure::Abort(m) => m,
        }
    }
}

impl From<sphdiff_core::Error> for Failure {
    fn from(e: sphdiff_core::Error) -> Self {
        match e {
            sphdiff_core::Error::NonFinite(_) => Failure::Abort(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let config = config::load(cli.config.as_deref())?;
    let config = config.as_ref();
    match cli.command {
        Command::VerifyOperators(a) => commands::verify_operators(config::apply(a, config, "verify-operators")?),
        Command::Covariance(a) => commands::covariance(config::apply(a, config, "covariance")?),
        Command::Diffuse(a) => commands::diffuse(config::apply(a, config, "diffuse")?),
        Command::BoundCheck(a) => commands::bound_check(config::apply(a, config, "bound-check")?),
        Command::SlicedW(a) => commands::sliced_w(config::apply(a, config, "sliced-w")?),
        Command::Export(a) => commands::export(config::apply(a, config, "export")?),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
