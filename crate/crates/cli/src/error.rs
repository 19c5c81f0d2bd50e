use std::fmt;

use cpinfluence::Error;

/// Process exit codes.
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }

    pub fn nonconvergence(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_NONCONVERGENCE,
            message: message.to_string(),
        }
    }

    pub fn internal(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_)
            | Error::UnknownAccount { .. }
            | Error::UnknownTopic { .. }
            | Error::DuplicateEventTime { .. }
            | Error::NoLikelihoodEvents
            | Error::Dimension(_)
            | Error::RankDeficient { .. }
            | Error::Config(_)
            | Error::Csv { .. } => EXIT_INPUT,
            Error::Saturation { .. }
            | Error::NonFinite { .. }
            | Error::LineSearch(_)
            | Error::PageRankNotConverged { .. } => EXIT_NONCONVERGENCE,
            Error::Io(_) => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}
