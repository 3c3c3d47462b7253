//! Library half of the `ratedouble` command-line tool: config parsing,
//! report emission, and the subcommand drivers. The binary in `main.rs` is a
//! thin argument-parsing shell over [`runner`], so everything here is also
//! callable from integration tests without spawning a process.

pub mod config;
pub mod report;
pub mod runner;

use thiserror::Error;

pub use config::{build_pair, RawConfig};
pub use report::{emit_report, render_sweep_csv, SWEEP_HEADER};
pub use runner::{
    cmd_audit, cmd_demo, cmd_study, cmd_verify, identity_suite, IdentitySuite, RunOptions,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] ratedouble_core::CoreError),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Exit code for configuration and IO failures; audit/verdict failures use 1
/// and are returned as successful `Ok(1)` results by the drivers.
pub const EXIT_CONFIG: i32 = 2;
