use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid label `{0}`: labels are identifiers (letters, digits, underscore, not starting with a digit)")]
    InvalidLabel(String),

    #[error("invalid state name `{0}`")]
    InvalidStateName(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("initial state `{0}` is not among the declared states")]
    MissingInitial(String),

    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("label `{0}` has conflicting polarity")]
    LabelClash(String),

    #[error("cannot quotient state `{0}` with itself")]
    SameState(String),

    #[error("{what} exceeded the limit of {limit}")]
    ResourceLimit { what: &'static str, limit: usize },

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unbound reference `{0}`")]
    UnboundReference(String),

    #[error("type error: {0}")]
    Type(String),

    #[error("integer overflow evaluating `{0}`")]
    Overflow(String),

    #[error("at round {index}: {source}")]
    AtRound { index: usize, source: Box<Error> },

    #[error("value {value} of `{name}` lies outside the domain [{lo}..{hi}]")]
    DomainExceeded {
        name: String,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("not a symbolic protocol: {0}")]
    NotAProtocol(String),

    #[error("{}", ErrorList(.0))]
    Invalid(Vec<Error>),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Collapses a list of violations: one violation is reported as itself.
    pub(crate) fn from_violations(mut violations: Vec<Error>) -> Option<Self> {
        match violations.len() {
            0 => None,
            1 => violations.pop(),
            _ => Some(Error::Invalid(violations)),
        }
    }

    pub fn is_resource_limit(&self) -> bool {
        match self {
            Error::ResourceLimit { .. } => true,
            Error::AtRound { source, .. } => source.is_resource_limit(),
            Error::Invalid(list) => list.iter().any(Error::is_resource_limit),
            _ => false,
        }
    }
}

struct ErrorList<'a>(&'a [Error]);

impl fmt::Display for ErrorList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violations:", self.0.len())?;
        for e in self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}
