//! Command-line front end: `otgeom <config.toml> [--seed N] [--samples N] [--tol X] [--out DIR]`.
//!
//! Exit status: 0 when every check passes, 1 when a tolerance check fails,
//! 2 for configuration or precondition errors.

pub mod config;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use config::{Command, ConfigError, Overrides, RunConfig};
pub use report::{Check, PointRecord, StructureReport};
pub use run::execute;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "otgeom",
    version,
    about = "Conformal geometry checks for optimal transport"
)]
pub struct Args {
    /// TOML run configuration.
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Tolerance of the command's headline check.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory for report.json and points.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Args {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            samples: self.samples,
            tol: self.tol,
            out: self.out.clone(),
        }
    }
}

/// Loads, runs and writes outputs; returns the report.
pub fn run_with(args: &Args) -> Result<StructureReport, ConfigError> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(&args.overrides());
    let report = execute(&cfg)?;
    // `--out` is relative to the working directory, `output.dir` to the config file
    let dir = match &args.out {
        Some(out) => out.clone(),
        None => cfg.resolve(&cfg.output.dir),
    };
    report.write(&dir, cfg.output.points_csv)?;
    Ok(report)
}

/// Entry point used by the binary; returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_PASS
            };
        }
    };
    match run_with(&args) {
        Ok(report) => {
            for c in &report.checks {
                println!(
                    "{} {}: {:e} (tolerance {:e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_TOLERANCE
            }
        }
        Err(e) => {
            eprintln!("otgeom: {e}");
            EXIT_CONFIG
        }
    }
}
