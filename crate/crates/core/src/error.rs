use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A modelling assumption failed; `name` is the tag of the violated
    /// hypothesis, e.g. `(V1)` or `kappa bound`.
    #[error("assumption {name} violated: {detail}")]
    Assumption { name: String, detail: String },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("quadrature did not converge: estimate {value:e}, error {error:e} > tolerance {tolerance:e}")]
    Quadrature {
        value: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("field has no positive part inside the concentration region")]
    NoPositivePart,

    #[error("no sign change of the Nehari mismatch up to t = {t_max:e}")]
    NoBracket { t_max: f64 },

    #[error("decay annulus is empty: {0}")]
    EmptyAnnulus(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        detail: detail.into(),
    }
}
