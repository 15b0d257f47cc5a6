use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StocError {
    /// An input lies outside the physically meaningful range.
    #[error("domain error in `{field}`: {message}")]
    Domain { field: &'static str, message: String },

    /// A quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {achieved:e} exceeds tolerance {requested:e}")]
    NonConvergence { achieved: f64, requested: f64 },

    /// The requested observable is not defined for the given illumination.
    #[error("mode error: {0}")]
    Mode(String),

    /// A failure while evaluating one grid point of a sweep.
    #[error("at {axis} = {value}: {source}")]
    AtPoint {
        axis: &'static str,
        value: f64,
        source: Box<StocError>,
    },

    /// A sweep or run configuration is invalid.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: &'static str, message: String },
}

impl StocError {
    pub(crate) fn domain(field: &'static str, message: impl Into<String>) -> Self {
        StocError::Domain {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn config(field: &'static str, message: impl Into<String>) -> Self {
        StocError::Config {
            field,
            message: message.into(),
        }
    }

    /// Name of the offending field, when the error is tied to one.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            StocError::Domain { field, .. } | StocError::Config { field, .. } => Some(field),
            StocError::AtPoint { source, .. } => source.field(),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, StocError>;
