//! Command errors with exit codes and a JSON rendering for stderr.

use std::fmt;

use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable input, malformed JSON or schema violations.
    Parse,
    /// An enumeration or state space cap was hit.
    Cap,
    /// Inputs outside the domain of an operation.
    Domain,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Cap => 3,
            ErrorKind::Domain => 4,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse",
            ErrorKind::Cap => "cap",
            ErrorKind::Domain => "domain",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> CliError {
        CliError {
            kind: ErrorKind::Parse,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> CliError {
        CliError {
            kind: ErrorKind::Domain,
            message: message.into(),
        }
    }

    /// Prefixes the message with `what: `.
    pub fn context(mut self, what: &str) -> CliError {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn to_json(&self) -> String {
        crate::canon::to_string(&json!({
            "error": {
                "kind": self.kind.name(),
                "message": self.message,
                "exit_code": self.kind.exit_code(),
            }
        }))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind.name(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<cics_core::Error> for CliError {
    fn from(e: cics_core::Error) -> CliError {
        let kind = match e {
            cics_core::Error::CapExceeded { .. } => ErrorKind::Cap,
            cics_core::Error::InvalidDist(_) | cics_core::Error::InvalidMdp(_) => ErrorKind::Parse,
            _ => ErrorKind::Domain,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}
