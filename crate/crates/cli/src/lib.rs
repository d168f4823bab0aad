//! Command-line front end for the shrinker toolkit.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 a verification check failed.

// `!(x >= lo)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

use config::CommonArgs;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    /// Checks ran to completion but some failed; the report has been written.
    Verification(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Verification(names) => write!(f, "verification failed: {}", names.join(", ")),
        }
    }
}

impl From<llg_shrinker::Error> for CliError {
    fn from(e: llg_shrinker::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "llg-shrinker",
    version,
    about = "Self-similar shrinker profiles of the 1-D LLG equation"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the profile frame and write the sampled trace.
    Integrate(IntegrateArgs),
    /// Extract the limit constants and run the identity suite.
    Constants(CommonOnly),
    /// Run every bound, identity and structural check.
    Verify(CommonOnly),
    /// Write the data behind one of the four profile figures.
    Figures(FigureArgs),
    /// Limit-circle angle along a grid of `c` or `alpha`.
    ScanAngle(ScanAngleArgs),
    /// Limit constants along a grid of `c` at fixed `alpha`.
    ScanContinuity(ScanContinuityArgs),
    /// Pairing of the shrinker with a bump test function as t approaches T.
    WeakLimit(WeakLimitArgs),
}

#[derive(Debug, Args)]
pub struct CommonOnly {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sample spacing of the written trace.
    #[arg(long, default_value_t = 0.01)]
    pub spacing: f64,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub id: u32,
    #[arg(long, default_value_t = 0.01)]
    pub spacing: f64,
}

#[derive(Debug, Args)]
pub struct ScanAngleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Values of `c` at fixed `alpha` (default 1,2,4).
    #[arg(long, value_delimiter = ',', conflicts_with = "alpha_grid")]
    pub c_grid: Option<Vec<f64>>,
    /// Values of `alpha` at fixed `c`.
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ScanContinuityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Values of `c` in [0.005, 10] (default 0.4,0.5,0.6).
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct WeakLimitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Values of `T − t` (default 0.1,0.01,0.001).
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<f64>>,
    /// Radius of the bump test function.
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.0)]
    pub center: f64,
    /// Spatial spacing of the CSV samples.
    #[arg(long, default_value_t = 0.01)]
    pub spacing: f64,
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
