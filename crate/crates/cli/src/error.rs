use std::fmt;

use thiserror::Error;

/// Failures of the command-line front end. Each renders as one
/// machine-readable diagnostic line.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("cannot parse `{value}` for `{key}`")]
    Parse { key: String, value: String },

    #[error("`{key}` out of range: {message}")]
    Range { key: String, message: String },

    #[error("missing `{0}`")]
    Missing(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure in {context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: stoc::StocError,
    },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::UnknownKey(_) => "unknown-key",
            CliError::Parse { .. } => "parse",
            CliError::Range { .. } => "range",
            CliError::Missing(_) => "missing",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Numerical { .. } => "numerical",
        }
    }

    /// The configuration key the diagnostic refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            CliError::UnknownKey(k) | CliError::Missing(k) => Some(k),
            CliError::Parse { key, .. } | CliError::Range { key, .. } => Some(key),
            _ => None,
        }
    }

    /// Process exit status: 2 for configuration problems, 1 for failures
    /// while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Numerical { .. } => 1,
            _ => 2,
        }
    }

    /// Converts a validation error from the physics crate, keeping the key.
    pub fn from_domain(err: stoc::StocError) -> Self {
        match err.field() {
            Some(field) => CliError::Range {
                key: field.replace('_', "-"),
                message: err.to_string(),
            },
            None => CliError::Numerical {
                context: "validation".into(),
                source: err,
            },
        }
    }

    pub fn diagnostic(&self) -> Diagnostic<'_> {
        Diagnostic(self)
    }
}

/// `error kind=<kind> [key=<key>] message="<text>"`
pub struct Diagnostic<'a>(&'a CliError);

impl fmt::Display for Diagnostic<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error kind={}", self.0.kind())?;
        if let Some(key) = self.0.key() {
            write!(f, " key={key}")?;
        }
        let msg = self.0.to_string().replace('\n', " ").replace('"', "'");
        write!(f, " message=\"{msg}\"")
    }
}
