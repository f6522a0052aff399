//! Command-line front end: `fraclab power | compat | boundary | compare | selftest`.
//!
//! Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 usage or
//! configuration error, 3 numerical error.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;
use fraclab_core::FracError;
use thiserror::Error;

use crate::config::{Cli, RunConfig, CACHE_ENV};
use crate::report::write_coefficients;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] FracError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                FracError::InvalidArgument(_) | FracError::Assembly { .. } | FracError::Io(_) => EXIT_USAGE,
                FracError::Numerical(_)
                | FracError::Domain(_)
                | FracError::InvalidState(_)
                | FracError::InsufficientData { .. }
                | FracError::Cache(_) => EXIT_NUMERICAL,
            },
        }
    }
}

/// Parses `argv` (program name first), runs the experiment, writes its
/// outputs and returns the process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match run(cli) {
        Ok(passed) => {
            if passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (kind, flags) = cli.command.split();
    let env_cache = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(Into::into);
    let cfg = RunConfig::resolve(kind, flags, env_cache)?;
    let start = Instant::now();
    let mut outcome = commands::execute(&cfg)?;
    outcome.report.meta.wall_time_s = start.elapsed().as_secs_f64();

    let json = outcome.report.to_json()?;
    match &cfg.out {
        Some(p) => std::fs::write(p, &json).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => print!("{json}"),
    }
    if let (Some(path), Some(table)) = (&cfg.dump_coeffs, &outcome.table) {
        write_coefficients(path, table)?;
    }
    for (name, v) in &outcome.report.verdicts {
        eprintln!("{name}: {:?} (tolerance {:e})", v.verdict, v.tolerance);
    }
    Ok(outcome.report.passed())
}
