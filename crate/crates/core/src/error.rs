use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("channel is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("index {index} out of range for block length {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("symbol {symbol} not in output alphabet of size {size}")]
    UnknownSymbol { symbol: usize, size: usize },

    #[error("degenerate likelihood at index {0}: conditioning event has probability zero")]
    DegenerateLikelihood(usize),

    #[error("support violation: KL divergence is infinite")]
    SupportViolation,

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("table of {required} entries exceeds the exact-enumeration cap of {cap}")]
    CapExceeded { required: u128, cap: usize },

    #[error("nesting violation: {0} index(es) good for W_X|V but bad for W_YX|V")]
    NestingViolation(usize),

    #[error("coordination condition violated: {0}")]
    ConditionViolation(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that indicate a broken mathematical invariant rather
    /// than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::NestingViolation(_) | Error::SupportViolation | Error::DegenerateLikelihood(_)
        )
    }
}
