//! Command-line front end: scenario evaluation, parameter sweeps, swapping
//! tables, synthetic pipeline runs and the reference-data check.

pub mod check;
pub mod commands;
pub mod config;
pub mod eval;
pub mod grid;
pub mod presets;

use std::process::ExitCode;

use thiserror::Error;

/// Environment variable setting the number of worker threads.
pub const WORKERS_ENV: &str = "CVTELE_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("model: {0}")]
    Model(String),
    #[error("io: {0}")]
    Io(String),
    #[error("{0} check(s) failed")]
    Checks(usize),
}

impl CliError {
    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    /// 2 for usage and configuration errors, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Model(_) | CliError::Io(_) | CliError::Checks(_) => 1,
        }
    }

    pub fn with_context(self, ctx: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{m} ({ctx})")),
            CliError::Config(m) => CliError::Config(format!("{m} ({ctx})")),
            CliError::Model(m) => CliError::Model(format!("{m} ({ctx})")),
            CliError::Io(m) => CliError::Io(format!("{m} ({ctx})")),
            c @ CliError::Checks(_) => c,
        }
    }
}

/// Sizes the global thread pool from [`WORKERS_ENV`] when it is set.
pub fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV}={raw:?}: expected a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("{WORKERS_ENV}: {e}")))
}

pub fn run(cli: commands::Cli) -> ExitCode {
    match configure_workers().and_then(|_| commands::dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cvtele: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
