//! `bergman`: batch front end for bergman-core.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "bergman",
    version,
    about = "Bergman polynomials, Faber polynomials and conformal maps in high precision"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Working precision in decimal digits (default 30 + 3 nmax).
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Maximum polynomial degree.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Output directory; tables go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Moment cache directory.
    #[arg(long, global = true, env = "BERGMAN_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Catalog domain (see `domains list`), when no config is given.
    #[arg(long, global = true)]
    pub domain: Option<String>,
    /// Catalog parameters, comma separated decimals.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Catalog domains.
    Domains {
        #[command(subcommand)]
        action: DomainsAction,
    },
    /// Moment matrix (j, k, re, im).
    Moments,
    /// Orthonormal basis coefficients and zeros.
    Basis,
    /// Faber polynomials of both kinds.
    Faber,
    /// Capacity estimates and conformal maps.
    Conformal {
        #[command(subcommand)]
        action: ConformalAction,
    },
    /// A single diagnostic: report, per-degree, pointwise, fits, hessenberg, corner-integral, distortion.
    Diagnostics { name: String },
    /// Run the acceptance suite; exit status 1 if any criterion fails.
    Verify {
        /// Restrict to these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Moment cache maintenance.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
    /// Config-driven batch run (requires --config).
    Run,
}

#[derive(Subcommand, Debug)]
pub enum DomainsAction {
    List,
}

#[derive(Subcommand, Debug)]
pub enum ConformalAction {
    /// cap_hat and gamma_hat from consecutive leading coefficients.
    Capacity,
    /// Exterior map Phi (outside) or the interior kernel-method map (inside).
    Map {
        /// Point `re,im`; repeatable.
        #[arg(long = "at", required = true, allow_hyphen_values = true)]
        at: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum CacheAction {
    Purge,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("bergman: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
