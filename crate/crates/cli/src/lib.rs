//! Command implementations behind the `paley-esh` binary.
//!
//! Every command renders to a string first, so the binary and the tests see
//! the same bytes.

pub mod config;
mod render;
mod run;

use paley_esh::gf::prime_power;
use paley_esh::par::Execution;
use thiserror::Error;

pub use config::{Command, Format, RunConfig};
pub use run::run;

/// Version of the JSON envelope in `schema/paley-esh.schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Guard(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

/// Rendered output and the exit code it should leave with.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub exit_code: i32,
}

pub const EXIT_VERIFICATION: i32 = 4;

pub fn is_paley_order(q: u64) -> bool {
    q % 4 == 1 && prime_power(q).is_some()
}

/// Rejects orders that do not define a Paley graph, naming the reason.
pub fn check_order(q: u64) -> Result<(), CliError> {
    if q % 4 != 1 {
        return Err(CliError::Input(format!("q = {q}: q ≢ 1 (mod 4)")));
    }
    if prime_power(q).is_none() {
        return Err(CliError::Input(format!("q = {q} is not a prime power")));
    }
    if q > 1 << 20 {
        return Err(CliError::Input(format!("q = {q} exceeds the supported field order")));
    }
    Ok(())
}

/// One thread means the sequential path throughout.
pub fn execution(threads: usize) -> Execution {
    if threads == 1 {
        Execution::Sequential
    } else {
        Execution::default()
    }
}
