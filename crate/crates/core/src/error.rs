use std::fmt;

use thiserror::Error;

/// Which rate a caller asked for when the denominator turned out to be zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Selection,
    TruePositive,
    FalsePositive,
    Base,
    MeanUtility,
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RateKind::Selection => "selection rate",
            RateKind::TruePositive => "true positive rate",
            RateKind::FalsePositive => "false positive rate",
            RateKind::Base => "base rate",
            RateKind::MeanUtility => "mean utility",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{rate} undefined for group {group}: {reason}")]
    UndefinedRate {
        group: usize,
        rate: RateKind,
        reason: &'static str,
    },

    #[error("group {group} has no {} samples", if *.positive { "positive" } else { "negative" })]
    MissingClass { group: usize, positive: bool },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("target ({fpr}, {tpr}) lies outside the ROC hull (distance {distance:.3e})")]
    InfeasiblePoint { fpr: f64, tpr: f64, distance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown group id {0}")]
    UnknownGroup(usize),

    #[error("decision not set for individual {0}")]
    DecisionUnset(usize),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config field `{field}`: {message}")]
    ConfigField { field: String, message: String },

    #[error("policy file error at line {line}: {message}")]
    PolicyFormat { line: usize, message: String },

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigField {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn file(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::File {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Coarse category used by the CLI to pick an exit code.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::ConfigParse { .. }
            | Error::ConfigField { .. }
            | Error::PolicyFormat { .. }
            | Error::InvalidInput(_)
            | Error::Domain(_)
            | Error::UnknownGroup(_) => ErrorCategory::Validation,
            Error::Io(_) | Error::File { .. } | Error::Csv(_) => ErrorCategory::Io,
            Error::Replicate { source, .. } => source.category(),
            _ => ErrorCategory::Runtime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Io,
    Runtime,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
