//! Command-line front end for `tavis-core`.
//!
//! Exit codes: `0` success, `1` a check failed (or a Gauss factor was
//! singular), `2` bad usage or configuration.

pub mod commands;
pub mod config;
pub mod initial;

use thiserror::Error;

pub use config::{RunArgs, RunConfig};
pub use initial::{FieldSpec, InitialStateSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] tavis_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
