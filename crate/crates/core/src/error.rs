use thiserror::Error;

/// Errors raised by the model, the solver and the scenario loader.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented range. `field` is the dotted
    /// path used in scenario files, e.g. `laa.txop_us`.
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// An argument lies outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// The coupled fixed point was not reached within the iteration budget.
    #[error(
        "solver did not converge after {iterations} iterations \
         (residual {residual:e}, last iterate tau_w={tau_w}, tau_l={tau_l})"
    )]
    NoConvergence {
        tau_w: f64,
        tau_l: f64,
        residual: f64,
        iterations: usize,
    },

    /// Writing a trace or report failed.
    #[error("i/o: {0}")]
    Io(String),

    /// The scenario file could not be parsed.
    #[error("scenario file: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
