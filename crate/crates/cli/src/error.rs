use cap_core::CapError;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{name}: {0}", name = .0.name())]
    Core(CapError),
    #[error("output error: {0}")]
    Output(String),
}

impl From<CapError> for CliError {
    fn from(e: CapError) -> Self {
        match e {
            // parameter checks the config validation did not anticipate
            CapError::InvalidWavenumber(_)
            | CapError::InvalidParameters(_)
            | CapError::InvalidTruncation(_)
            | CapError::InvalidBracket(..)
            | CapError::DuplicateWavenumber(_) => CliError::Config(format!("{}: {e}", e.name())),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Core(CapError::NoFiniteStart) => 4,
            CliError::Core(CapError::BracketTooNarrow(_)) => 5,
            CliError::Core(_) => 3,
            CliError::Output(_) => 1,
        })
    }
}
