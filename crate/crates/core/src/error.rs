//! Error taxonomy shared by every module.
//!
//! The CLI maps these onto its exit-code contract: schema/parse/validation/
//! domain/degenerate/spec errors are input errors (exit 2), non-convergence
//! is a numerical failure (exit 3) and still carries the last iterate.

use crate::coxph::FittedCoxModel;
use crate::glm::FittedGlmModel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A named column or covariate is missing or unexpected.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell could not be parsed; `row` is the 1-based data row.
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    /// An input value violates a data invariant; `row` is 1-based when known.
    #[error("validation error{}: {message}", .row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Validation { row: Option<usize>, message: String },

    /// A parameter is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The data cannot support the requested fit (e.g. no observed events).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// An invalid simulation specification.
    #[error("spec error: {0}")]
    Spec(String),

    /// GLM fit stopped without meeting the convergence criterion.
    /// Carries the last iterate so callers can still inspect or persist it.
    #[error("glm fit did not converge after {} iterations", .0.iterations)]
    NonConvergedGlm(Box<FittedGlmModel>),

    /// Cox fit stopped without meeting the convergence criterion.
    #[error("cox fit did not converge after {} iterations", .0.iterations)]
    NonConvergedCox(Box<FittedCoxModel>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation { row: None, message: message.into() }
    }

    pub fn validation_at(row: usize, message: impl Into<String>) -> Self {
        Error::Validation { row: Some(row), message: message.into() }
    }

    /// True for errors caused by inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NonConvergedGlm(_) | Error::NonConvergedCox(_))
    }
}
