use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("order relates distinct elements {0:?} and {1:?} in both directions")]
    Cycle(String, String),
    #[error("duplicate element {0:?}")]
    DuplicateElement(String),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("enumeration over {size} items exceeds the cap of {cap}")]
    SizeLimitExceeded { size: usize, cap: usize },
    #[error("family is not directed: {0}")]
    NotDirected(String),
    #[error("subset is not an upper set: {0:?} is missing")]
    NotOpen(String),
    #[error("coefficient {1} at {0:?} is not strictly positive")]
    NonPositiveCoefficient(String, Rational),
    #[error("scalar {0} is negative")]
    NegativeScalar(Rational),
    #[error("operands live on different spaces")]
    SpaceMismatch,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("operation left the cone carrier: {0}")]
    CarrierViolation(String),
    #[error("map is not monotone: {lower:?} <= {upper:?} but the images are not ordered")]
    NonMonotoneMap { lower: String, upper: String },
    #[error("binder is not monotone: {lower:?} <= {upper:?} but the continuations are not ordered")]
    NonMonotoneBinder { lower: String, upper: String },
    #[error("binder table has no entry for state {0:?}")]
    MissingBinderEntry(String),
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown state {name:?} at {line}:{column}")]
    UnknownState {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("unknown property suite {0:?}")]
    UnknownSuite(String),
    #[error("malformed document: {0}")]
    Document(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable name used in JSON error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Cycle(..) => "CycleError",
            Error::DuplicateElement(_) => "DuplicateElement",
            Error::UnknownElement(_) => "UnknownElement",
            Error::SizeLimitExceeded { .. } => "SizeLimitExceeded",
            Error::NotDirected(_) => "NotDirected",
            Error::NotOpen(_) => "NotOpen",
            Error::NonPositiveCoefficient(..) => "NonPositiveCoefficient",
            Error::NegativeScalar(_) => "NegativeScalar",
            Error::SpaceMismatch => "SpaceMismatch",
            Error::PreconditionFailed(_) => "PreconditionFailed",
            Error::CarrierViolation(_) => "CarrierViolation",
            Error::NonMonotoneMap { .. } => "NonMonotoneMap",
            Error::NonMonotoneBinder { .. } => "NonMonotoneBinder",
            Error::MissingBinderEntry(_) => "MissingBinderEntry",
            Error::Syntax { .. } => "SyntaxError",
            Error::UnknownState { .. } => "UnknownState",
            Error::UnknownSuite(_) => "UnknownSuite",
            Error::Document(_) => "DocumentError",
            Error::Internal(_) => "InternalError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
