//! Command-line front end: JSON configs, named presets, CSV output and
//! pass/fail assertions.

pub mod config;
pub mod presets;
pub mod report;
pub mod runner;

/// Exit status for a run whose assertions all hold.
pub const EXIT_OK: i32 = 0;
/// Exit status for a failed assertion or a numerical failure.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for an invalid configuration or command line.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("run failed: {0}")]
    Run(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Run(_) | Self::Io(_) => EXIT_FAILURE,
        }
    }
}
