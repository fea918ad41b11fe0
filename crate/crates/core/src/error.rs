use core::fmt;

use alloc::string::String;

/// Errors surfaced by the sampling, evaluation and estimation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside its mathematical domain.
    Domain(String),
    /// A model was built with parameters that violate its invariants.
    InvalidModel(String),
    /// An empirical routine was given fewer samples than it needs.
    InsufficientData { needed: usize, got: usize },
    /// No closed form exists for the requested quantity.
    Unavailable(String),
    /// A design (regressor configuration) is degenerate for the estimator.
    DegenerateDesign(String),
    /// A symmetric factorization hit a non-positive pivot.
    SingularPivot { pivot: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed} samples, got {got}")
            }
            Error::Unavailable(msg) => write!(f, "no closed form: {msg}"),
            Error::DegenerateDesign(msg) => write!(f, "degenerate design: {msg}"),
            Error::SingularPivot { pivot } => {
                write!(f, "matrix is not positive definite: pivot {pivot} failed")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
