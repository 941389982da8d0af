//! Command line front end.

pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Format, RunConfig};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "x1jacobi",
    version,
    about = "X1-Jacobi recurrences, Christoffel moments and spectra"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Run parameters. Flags override values read from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Matrix / moment sizes; repeat the flag for several values.
    #[arg(long = "N", global = true)]
    pub n: Vec<usize>,
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    #[arg(long, global = true)]
    pub lmax: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file with a run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if !self.n.is_empty() {
            cfg.n_values = self.n.clone();
        }
        if let Some(v) = self.kmax {
            cfg.k_max = v;
        }
        if let Some(v) = self.lmax {
            cfg.l_max = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact path-counting identities.
    Paths {
        #[command(subcommand)]
        action: PathsAction,
    },
    /// Coefficient table of the classical partner family.
    Coeffs,
    /// Five-term coefficients and their limits.
    Recurrence,
    /// Q-moments and density of the Christoffel measures.
    Moments,
    /// Eigenvalues of the truncated multiplication operator.
    Spectrum,
    /// Everything, plus a pass/fail summary.
    Report,
}

#[derive(Debug, Subcommand)]
pub enum PathsAction {
    Verify {
        /// Check every suite up to this path length.
        #[arg(long)]
        max_length: Option<u64>,
        /// Corrupt one brute-force weight (exercises the failure report).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Parse `args`, run, and return the process exit code. Errors are
/// printed to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
