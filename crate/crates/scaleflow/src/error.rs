//! Error taxonomy shared by the whole crate.
//!
//! Numerical report-style operations (axiom suites, ledgers, growth checks)
//! do not error on a failed inequality — they return a report with pass
//! flags.  Errors are reserved for misuse (preconditions, configuration),
//! invalid data (validation), and genuine numerical failure (singular
//! frames, flow blow-up).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Ill-formed or inconsistent configuration (e.g. mismatched weight
    /// functions, unknown catalog id, invalid scenario file).
    #[error("configuration error: {0}")]
    Config(String),

    /// A documented operation precondition was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Input data failed a structural invariant (e.g. loop symmetry,
    /// incompatible almost complex structure, non-real boundary
    /// coefficients).
    #[error("validation failed: {0}")]
    Validation(String),

    /// The operation is not defined for this variant of the input.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A pointwise matrix became (numerically) singular.
    #[error("numerical singularity: {0}")]
    Singular(String),

    /// The flow escaped the configured norm ceiling.  The unregularized
    /// flow is exponentially unstable in high modes; this is expected
    /// behavior on long windows and is reported, not hidden.
    #[error("flow blow-up at s = {s:.6}: state norm {norm:.3e} exceeds ceiling {ceiling:.3e}")]
    BlowUp { s: f64, norm: f64, ceiling: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("report serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::Singular(msg.into())
    }
}
