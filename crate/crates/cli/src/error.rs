use thiserror::Error;

use pfs_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_NOT_AGREEABLE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::NotAgreeable { .. }) => EXIT_NOT_AGREEABLE,
            CliError::Core(CoreError::OrderHypothesisViolated(_) | CoreError::PreconditionViolated(_)) => {
                EXIT_PRECONDITION
            }
            // An infeasible schedule handed to a command is a failed check.
            CliError::Core(CoreError::InfeasibleInput(_)) => EXIT_VERIFY,
            _ => EXIT_IO,
        }
    }
}
