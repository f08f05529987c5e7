//! Batch front end for `specstat`: delimited-text ingestion, JSON reports and
//! plot-ready TSV output.

pub mod args;
pub mod commands;
pub mod error;
pub mod ingest;
pub mod output;
pub mod report;

pub use error::{CliError, Result};
pub use ingest::{ingest, ingest_str, ColumnSelector, IngestOptions, InputDescriptor};
pub use report::RunReport;

use args::{Cli, Command};

/// Caps the global rayon pool from `SPECSTAT_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SPECSTAT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::usage(format!(
            "SPECSTAT_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot size the thread pool: {e}")))
}

pub fn run(cli: &Cli) -> Result<i32> {
    configure_threads()?;
    match &cli.command {
        Command::Test(a) => commands::cmd_test(a),
        Command::Qprofile(a) => commands::cmd_qprofile(a),
        Command::Cv(a) => commands::cmd_cv(a),
        Command::Power(a) => commands::cmd_power(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
    }
}
