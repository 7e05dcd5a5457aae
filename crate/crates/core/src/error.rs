use thiserror::Error;

/// Errors raised by the library. The CLI maps them onto exit codes via
/// [`Error::class`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("participant {id:?}: {field} must be > 0")]
    NonPositiveParameter { id: String, field: &'static str },
    #[error("participant {id:?}: {field} must be finite")]
    NonFiniteParameter { id: String, field: &'static str },
    #[error("duplicate participant id {0:?}")]
    DuplicateId(String),
    #[error("instance has no participants")]
    EmptyInstance,
    #[error("position {position} out of range for {len} participants")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("expected {expected} bids, got {got}")]
    BidCountMismatch { expected: usize, got: usize },
    #[error("bid for participant {0:?} is negative")]
    NegativeBid(String),
    #[error("bid for participant {0:?} is not finite")]
    NonFiniteBid(String),
    #[error("unknown participant {0:?}")]
    UnknownParticipant(String),
    #[error("bid profile is for {got}, mechanism is {expected}")]
    MechanismMismatch { expected: &'static str, got: &'static str },
    #[error("ordering is not a permutation of 0..{0}")]
    InvalidOrdering(usize),
    #[error("bids are not non-increasing along the given ordering")]
    InconsistentOrdering,
    #[error("N = {n} exceeds the enumeration limit {limit}")]
    SizeLimitExceeded { n: usize, limit: usize },
    #[error("GSP lower bound needs the oracle, N = {n} exceeds its limit {limit}")]
    OracleLimitExceeded { n: usize, limit: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// Coarse error classes, one per CLI exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Validation,
    Internal,
    SizeLimit,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse(_) => ErrorClass::Parse,
            Error::Internal(_) => ErrorClass::Internal,
            Error::SizeLimitExceeded { .. } | Error::OracleLimitExceeded { .. } => {
                ErrorClass::SizeLimit
            }
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
