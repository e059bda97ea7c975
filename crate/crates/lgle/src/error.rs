use thiserror::Error;

/// Errors surfaced by the numeric and sampling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    #[error("{context} failed to converge: {message}")]
    NonConvergence {
        context: &'static str,
        message: String,
    },

    #[error("grid window too small: boundary holds {edge_fraction:.3e} of the total mass")]
    WindowTooSmall { edge_fraction: f64 },

    #[error("requested window [{lo}, {hi}] not covered by available data")]
    WindowViolation { lo: i64, hi: i64 },

    #[error("enumeration would exceed the configured bound of {bound} tuples")]
    SizeGuard { bound: u64 },

    #[error("degenerate normalizer: total mass vanished within numeric range")]
    DegenerateMass,

    #[error("empty input to {0}")]
    EmptyInput(&'static str),

    #[error("degenerate least-squares fit: {0}")]
    DegenerateFit(&'static str),
}

impl Error {
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            context,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
