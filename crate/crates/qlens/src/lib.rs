//! Command-line driver and JSON formats for [`qlens_core`].
//!
//! The binary `qlens` exposes every property suite of the core crate as a
//! subcommand. Reports go to standard output as JSON, a short summary goes
//! to standard error, and the exit status is 0 when every check passes, 1
//! when a check fails and 2 on bad input.

pub mod cli;
pub mod config;
pub mod projection;

use std::path::PathBuf;

/// Errors surfaced by the driver.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qlens_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
}
