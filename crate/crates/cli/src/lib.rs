//! Command-line front end for `collatz-core`.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 verification anomaly
//! (budget exhausted, self-check failure), 3 resource guard.

use std::path::Path;

use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{execute, Report};
pub use config::{Cli, OutputFormat, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("output: {0}")]
    Output(String),
    #[error("verification anomaly: {0}")]
    Anomaly(String),
    #[error("resource limit: {0}")]
    Resource(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Output(_) => 1,
            CliError::Anomaly(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

/// Parses, runs and writes one invocation; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;

    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_cli(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: Cli) -> Result<i32, CliError> {
    let config = RunConfig::from_cli(cli)?;
    let report = execute(&config)?;
    let text = output::render(&report, config.format)?;
    match &config.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e))?,
        None => print!("{text}"),
    }
    Ok(if report.anomaly() { 2 } else { 0 })
}
