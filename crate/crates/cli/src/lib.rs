//! Driver for the `gabor-bf` command-line tool.
//!
//! Exit codes: 0 success, 1 tolerance failure, 2 input or validation error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Command, Invocation, Outcome};
pub use config::{LoadedConfig, MethodChoice, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] gabor_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gabor_core::Error as E;
        match self {
            CliError::Core(
                E::TailTooLarge { .. }
                | E::DiscretizationTooCoarse { .. }
                | E::ConditionPhiDivergence { .. }
                | E::QuadratureNonConvergence { .. }
                | E::GridAliasing(_),
            ) => 1,
            _ => 2,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Worker count from `GABOR_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("GABOR_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Input(format!("GABOR_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}
