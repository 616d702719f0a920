use std::path::PathBuf;

use msdiff_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const POSITIVITY: i32 = 3;
    pub const CONVEXITY: i32 = 4;
    pub const STEP_LIMIT: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Core(CoreError::PositivityViolation { .. }) => exit::POSITIVITY,
            CliError::Core(CoreError::NotConvex { .. }) => exit::CONVEXITY,
            CliError::Core(CoreError::MaxStepsExceeded { .. }) => exit::STEP_LIMIT,
            CliError::Io { .. } | CliError::Core(_) | CliError::VerifyFailed(_) => exit::FAILURE,
        }
    }
}
