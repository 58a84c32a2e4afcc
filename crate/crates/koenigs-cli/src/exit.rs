//! Exit-code contract shared by every subcommand.

use core::fmt;

use koenigs_core::Error;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Pass = 0,
    Fail = 1,
    Invalid = 2,
    Degenerate = 3,
}

impl Code {
    pub fn as_i32(self) -> i32 {
        self as i32
    }
}

/// A command that could not produce a verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: Code,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: Code::Invalid, message: message.into() }
    }

    pub fn degenerate(message: impl Into<String>) -> Self {
        CliError { code: Code::Degenerate, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Input errors map to 2, failed hypotheses and verifications to 1, every
/// numerical degeneracy to 3.
pub fn classify(e: &Error) -> Code {
    match e {
        Error::MixedAmbient { .. }
        | Error::IndexOutOfRange { .. }
        | Error::InvalidInput(_)
        | Error::WindowTooSmall
        | Error::NotInParameterSpace { .. }
        | Error::NotNested { .. }
        | Error::NotExtensive => Code::Invalid,
        Error::HypothesisFailed(_) | Error::VerifyFailed { .. } | Error::ClosureFailure { .. } => Code::Fail,
        _ => Code::Degenerate,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError { code: classify(&e), message: e.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::invalid(format!("malformed JSON: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::invalid(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
