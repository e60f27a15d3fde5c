//! Command-line front end for the cocycles library: configuration,
//! experiment dispatch, acceptance suites and report files.

pub mod alpha;
pub mod config;
pub mod criteria;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use report::{Check, Outcome, Report};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "COCYCLES_WORKERS";

/// Sizes the global rayon pool from `COCYCLES_WORKERS`, if set.
pub fn configure_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("{WORKERS_ENV}={v:?} is not a worker count")))?;
    if n == 0 {
        return Err(CliError::Config(format!("{WORKERS_ENV} must be positive")));
    }
    // a pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
