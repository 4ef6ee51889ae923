use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CptError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("ill-posed preferences: alpha = {alpha} must be below 2*min(gamma, delta) = {bound}")]
    IllPosed { alpha: f64, bound: f64 },

    #[error("adaptive quadrature did not converge after {subdivisions} subdivisions (estimate {estimate}, error {error})")]
    NonConvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("inconsistent wealth path: {0}")]
    InconsistentPath(String),

    #[error("solver failed at period {period}: {source}")]
    Period {
        period: usize,
        #[source]
        source: Box<CptError>,
    },

    #[error("failed to read atom file: {0}")]
    Io(String),
}

impl CptError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CptError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when the error comes from a numerical routine rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            CptError::NonConvergence { .. } => true,
            CptError::Period { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, CptError>;
