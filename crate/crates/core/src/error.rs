use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the special-function layer, the plane integrator and the
/// Mellin-Barnes engines.
///
/// The variant name leads every message so that callers (and the CLI) can
/// match on the first word of the rendered error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("PoleAtArgument: gamma pole at {argument} (factor {index})")]
    PoleAtArgument { argument: Complex64, index: usize },

    #[error("NotBalanced: hol - anti = {difference} is not an integer")]
    NotBalanced { difference: Complex64 },

    #[error("DomainError: {0}")]
    Domain(String),

    #[error("ParityViolation: {0} must be even")]
    ParityViolation(String),

    #[error("CoincidentPoints: {0}")]
    CoincidentPoints(String),

    #[error("NonIntegrableSingularity at {location}: Re(hol + anti)/2 = {mean_exponent} >= 1")]
    NonIntegrableSingularity { location: Complex64, mean_exponent: f64 },

    #[error("InsufficientDecay: decay exponent {exponent} must exceed 2 + {margin}")]
    InsufficientDecay { exponent: f64, margin: f64 },

    #[error("BudgetExhausted: {evaluations} evaluations, error estimate {abs_err:e}")]
    BudgetExhausted { evaluations: usize, abs_err: f64 },

    #[error("UniquenessViolation: exponent sum is ({hol}, {anti}), expected (2, 2)")]
    UniquenessViolation { hol: Complex64, anti: Complex64 },

    #[error("ContourPinch: pole at nu = {pole} (n = {n}) lies {distance:e} from the contour")]
    ContourPinch { n: i64, pole: Complex64, distance: f64 },

    #[error("TruncationNotConverged: tail estimate {tail:e} exceeds tolerance {tol:e}")]
    TruncationNotConverged { tail: f64, tol: f64 },

    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Short variant name, as used in CLI messages and JSON records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::PoleAtArgument { .. } => "PoleAtArgument",
            Error::NotBalanced { .. } => "NotBalanced",
            Error::Domain(_) => "DomainError",
            Error::ParityViolation(_) => "ParityViolation",
            Error::CoincidentPoints(_) => "CoincidentPoints",
            Error::NonIntegrableSingularity { .. } => "NonIntegrableSingularity",
            Error::InsufficientDecay { .. } => "InsufficientDecay",
            Error::BudgetExhausted { .. } => "BudgetExhausted",
            Error::UniquenessViolation { .. } => "UniquenessViolation",
            Error::ContourPinch { .. } => "ContourPinch",
            Error::TruncationNotConverged { .. } => "TruncationNotConverged",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }

    /// True for failures of a numerical method, as opposed to inputs that
    /// violate a precondition.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BudgetExhausted { .. } | Error::TruncationNotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
