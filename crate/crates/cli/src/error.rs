use thiserror::Error;

use dht_spectrum_core::Error as CoreError;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE_CAP: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Core(e) => match e {
                CoreError::CodebookTooLarge { .. } => EXIT_RESOURCE_CAP,
                CoreError::InvalidPmf { .. }
                | CoreError::MarginalMismatch { .. }
                | CoreError::SymbolOutOfAlphabet { .. }
                | CoreError::LengthMismatch { .. }
                | CoreError::KindMismatch(_)
                | CoreError::Unsupported(_)
                | CoreError::InvalidParameter(_)
                | CoreError::TooFewTrials { .. }
                | CoreError::AlphabetTooLarge { .. }
                | CoreError::TooFewBlocklengths { .. }
                | CoreError::SingularKy
                | CoreError::NonSpd(_)
                | CoreError::SingularSigmaBar
                | CoreError::ModelFile(_) => EXIT_VALIDATION,
                _ => EXIT_OTHER,
            },
            CliError::Io(_) | CliError::Json(_) => EXIT_OTHER,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Validation(msg.into()))
}
