//! File formats and subcommands behind the `cstar-approx` binary.
//!
//! The environment variable `CSTAR_APPROX_THREADS` is reserved for a future
//! parallel solver and is currently ignored.

pub mod commands;
pub mod format;

use std::path::PathBuf;

use thiserror::Error;

pub use commands::{run_delta, run_solve, run_verify, DeltaOutcome, SolveOutcome, VerifyOutcome};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_REJECTED: u8 = 3;
pub const EXIT_UNSUPPORTED: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid problem: {0}")]
    Invalid(String),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("input digest {found} does not match the report digest {expected}")]
    DigestMismatch { expected: String, found: String },

    #[error("unsupported tail operator: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Core(#[from] cstar_approx::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Unsupported(_) => EXIT_UNSUPPORTED,
            _ => EXIT_INPUT,
        }
    }
}
