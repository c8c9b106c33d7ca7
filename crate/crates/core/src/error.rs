use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the set where the quantity is defined.
    #[error("{what}: {value} outside valid range {valid}")]
    Domain {
        what: &'static str,
        value: f64,
        valid: String,
    },
    /// Root bracketing failed; carries the interval that was scanned.
    #[error("no sign change of {what} on [{lo}, {hi}]")]
    Bracket { what: &'static str, lo: f64, hi: f64 },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("grid mismatch: {0}")]
    Grid(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, valid: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value,
            valid: valid.into(),
        }
    }
}
