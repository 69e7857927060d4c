//! CLI error type mapped onto process exit codes: 1 usage, 2 I/O,
//! 3 numerical or construction failure.

use std::fmt;

use sced::bpdec::DecodeError;
use sced::code::CodeError;
use sced::ensemble::EnsembleError;
use sced::sceddec::ScedError;
use sced::simlab::SimError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Numeric(m) => write!(f, "failure: {m}"),
        }
    }
}

impl From<CodeError> for CliError {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::AlistParse { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<DecodeError> for CliError {
    fn from(e: DecodeError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ScedError> for CliError {
    fn from(e: ScedError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidParam(_) => CliError::Usage(e.to_string()),
            SimError::Io(_) | SimError::Format(_) => CliError::Io(e.to_string()),
            SimError::BracketNotFound { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::InvalidParam(_) | EnsembleError::EnumerationTooLarge(_) => {
                CliError::Usage(e.to_string())
            }
            EnsembleError::BadFile(_)
            | EnsembleError::HashMismatch { .. }
            | EnsembleError::Io(_) => CliError::Io(e.to_string()),
            EnsembleError::RowGenFailure { .. }
            | EnsembleError::AttemptsExhausted(_)
            | EnsembleError::TooFewRows(_)
            | EnsembleError::EmptyRecords => CliError::Numeric(e.to_string()),
            EnsembleError::Code(inner) => inner.into(),
            EnsembleError::Decode(inner) => inner.into(),
        }
    }
}
