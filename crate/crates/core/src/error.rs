use thiserror::Error;

/// Errors raised by the exact-arithmetic kernel and everything built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,

    #[error("index out of range: {0}")]
    BadIndex(String),

    #[error("pole at evaluation point {0}")]
    PoleAtEvaluationPoint(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("moment functional is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("structure relation fails at n = {0}")]
    StructureCheckFailed(usize),

    #[error("moment table exhausted: need moment {needed}, have up to {available}")]
    MomentsExhausted { needed: usize, available: usize },

    #[error("degenerate connection denominator 1 + M K(c,c) = 0 at n = {0}")]
    DegenerateDenominator(usize),

    #[error("internal identity violated: {0}")]
    InternalIdentityViolation(String),

    #[error("singular connection: {0}")]
    SingularConnection(String),

    #[error("invalid operator mode: {0}")]
    InvalidMode(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the mathematics (as opposed to malformed input).
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite(_)
                | Error::StructureCheckFailed(_)
                | Error::DegenerateDenominator(_)
                | Error::SingularConnection(_)
                | Error::PoleAtEvaluationPoint(_)
                | Error::ZeroDenominator
                | Error::MomentsExhausted { .. }
                | Error::InternalIdentityViolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
