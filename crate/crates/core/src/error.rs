use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operands use different irrational bases")]
    BasisMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown irrational symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid irrational basis: {0}")]
    InvalidBasis(String),
    #[error("cannot parse scalar `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("value is within {bound} of an integer at {precision} bits; raise the precision")]
    NearInteger { precision: u32, bound: String },
    #[error("expansion test is indeterminate: eigenvalue modulus {modulus} lies within the margin of 1")]
    Indeterminate { modulus: f64 },
    #[error("matrix is not expanding")]
    NotExpanding,
    #[error("matrices do not commute")]
    NotCommuting,
    #[error("matrix is singular")]
    Singular,
    #[error("simultaneous triangularization failed (residual {0:e})")]
    Triangularization(f64),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("chain is reducible")]
    Reducible,
    #[error("word of length {len} too short: need {needed} letters")]
    InsufficientTruncation { len: usize, needed: usize },
    #[error("precision exceeded: {0}")]
    PrecisionExceeded(String),
    #[error("invalid config at `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("report schema error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
