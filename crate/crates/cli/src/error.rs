use hybrid_core::consistency::ConsistencyError;
use hybrid_core::dynamics::DynamicsError;
use thiserror::Error;

use crate::parse::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("cannot parse `{source_text}`: {error}")]
    Parse { source_text: String, error: ParseError },
    #[error("{0}")]
    Compute(String),
    #[error("{path}: {error}")]
    Io { path: String, error: std::io::Error },
}

impl CliError {
    /// `2` for bad input, `1` for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Parse { .. } => 2,
            CliError::Compute(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<ConsistencyError> for CliError {
    fn from(e: ConsistencyError) -> Self {
        match e {
            ConsistencyError::InvalidInput(_) | ConsistencyError::DegenerateScheme(_) => CliError::Input(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidSystem(_)
            | DynamicsError::InvalidState(_)
            | DynamicsError::InvalidTimeGrid(_)
            | DynamicsError::NonlinearSystem { .. }
            | DynamicsError::UnknownVariable(_) => CliError::Input(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}
