// Copyright 2026 vnerg Contributors
// SPDX-License-Identifier: Apache-2.0

//! Batch experiment runner behind the `vnerg` binary.
//!
//! Exit codes: 0 on success, 2 when a mathematical hypothesis fails (a
//! `reason=<Kind>` line goes to stdout), 1 on I/O, parse or validation errors.
//! No output file is written unless the run succeeds.

mod config;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use config::{emit, parse_complex, parse_problem, ConfigError, ExperimentConfig, Kind, MatrixBlock, Role};
pub use run::{parse_group, render, theorem_label, write_atomic};

use crate::amenable::SetLimits;

/// Environment variable capping Følner set sizes.
pub const MAX_SETSIZE_ENV: &str = "VNERG_MAX_SETSIZE";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Library(#[from] crate::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_hypothesis_failure() => 2,
            _ => 1,
        }
    }

    /// Machine-readable reason.
    pub fn reason(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Parse { .. }) => "ParseError",
            CliError::Config(ConfigError::Validation(_)) => "ValidationError",
            CliError::Library(e) => e.kind(),
            CliError::Io(_) => "IoError",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vnerg", version, about = "Ergodic averages on matrix algebras, written as CSV")]
pub struct Args {
    /// classify, ergodic, semigroup, group, folner-audit or duality
    #[arg(value_parser = parse_kind)]
    pub kind: Kind,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `tol_psd` in the config.
    #[arg(long = "tol-psd")]
    pub tol_psd: Option<f64>,
    /// Overrides `tol_eq` in the config.
    #[arg(long = "tol-eq")]
    pub tol_eq: Option<f64>,
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    s.parse()
}

/// Set-size cap from [`MAX_SETSIZE_ENV`], or the library default.
pub fn limits_from_env() -> Result<SetLimits, CliError> {
    match std::env::var(MAX_SETSIZE_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(|max_set_size| SetLimits { max_set_size })
            .map_err(|_| CliError::Config(ConfigError::Validation(format!("{MAX_SETSIZE_ENV}={v:?} is not a size")))),
        Err(_) => Ok(SetLimits::default()),
    }
}

/// Read, run and write one experiment.
pub fn execute(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_problem(&text)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.tol_psd.is_some() {
        cfg.tol_psd = args.tol_psd;
    }
    if args.tol_eq.is_some() {
        cfg.tol_eq = args.tol_eq;
    }
    let limits = limits_from_env()?;
    let csv = render(args.kind, &cfg, &limits)?;
    write_atomic(&args.out, &csv).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&args) {
        Ok(()) => 0,
        Err(e) => {
            println!("reason={}", e.reason());
            eprintln!("vnerg: {e}");
            e.exit_code()
        }
    }
}
