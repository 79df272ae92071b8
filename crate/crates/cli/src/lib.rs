//! Experiment runner around `evscale-core`: config handling, study
//! execution, result persistence.

pub mod config;
pub mod study;

use thiserror::Error;

/// Process exit codes: 0 ok, 2 config error, 3 infeasible run, 4 IO error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error("cycle error: {0}")]
    Cycle(#[from] evscale_core::cycle::CycleError),
    #[error("no feasible design in {mode} run (seed {seed}) after {evaluations} evaluations")]
    InfeasibleRun {
        mode: String,
        seed: u64,
        evaluations: usize,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("solver failed: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::InfeasibleRun { .. } => 3,
            CliError::Io { .. } => 4,
            // a cycle problem is a config error unless the file itself
            // cannot be read
            CliError::Cycle(evscale_core::cycle::CycleError::Io { .. }) => 4,
            CliError::Cycle(_) => 2,
            CliError::Solver(_) => 1,
        }
    }
}
