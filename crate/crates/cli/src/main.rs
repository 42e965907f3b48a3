//! `rphash`: Monte-Carlo, quadrature and asymptotic collision-rate
//! experiments for the random projection hash family.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid usage, 3 domain error
//! (infeasible or degenerate input, unsupported combination), 4 numeric
//! tolerance not met.

mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use rphash_core::Error;

use crate::commands::Cli;

/// A flag combination that parses but makes no sense.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidParameter(_)) => 2,
        Some(Error::ToleranceNotMet { .. }) => 4,
        Some(_) => 3,
        None => 1,
    }
}

/// Worker count from `RPHASH_THREADS`; results never depend on it.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("RPHASH_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("RPHASH_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()?;
    log::debug!("using {threads} worker threads");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_threads().and_then(|()| cli.run()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
