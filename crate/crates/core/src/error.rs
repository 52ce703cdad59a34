use thiserror::Error;

/// Errors raised by the toolkit. Every variant names the violated precondition.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("p must be prime, got {0}")]
    NotPrime(u32),

    #[error("digit {digit} at level {level} is not below p = {p}")]
    DigitOutOfRange { digit: u32, level: i64, p: u32 },

    #[error("invalid window: support scale {a} exceeds resolution scale {l}")]
    InvalidWindow { a: i64, l: i64 },

    #[error("window of {cells} cells exceeds the cap of {cap}")]
    WindowTooLarge { cells: u128, cap: u128 },

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("operands live over different fields")]
    FieldMismatch,

    #[error("zero has no angular part")]
    ZeroElement,

    #[error("element lies outside the ball P^{a}")]
    OutsideWindow { a: i64 },

    #[error("exponent r = {0} must satisfy r >= 1")]
    InvalidExponent(f64),

    #[error("level lambda = {0} must be positive")]
    NonPositiveLevel(f64),

    #[error("order alpha = {0} must be nonnegative")]
    NegativeOrder(f64),

    #[error("Littlewood-Paley index {0} must be nonnegative")]
    NegativeBlockIndex(i64),

    #[error("kernel resolution m must be at least 1")]
    InvalidResolution,

    #[error("kernel does not have mean zero on the unit sphere")]
    NotMeanZero,

    #[error("invalid atom: {0}")]
    InvalidAtom(String),

    #[error("multiplier undefined on spectral cell {0}")]
    UndefinedMultiplier(usize),

    #[error("function takes a negative or non-real value at cell {0}")]
    NotNonnegative(usize),

    #[error("average {average} over P^{scale} exceeds lambda = {lambda}; enlarge the starting ball")]
    StartScaleTooSmall { scale: i64, average: f64, lambda: f64 },

    #[error("malformed element: {0}")]
    MalformedElement(String),

    #[error("value is not finite")]
    NonFinite,

    #[error("unknown check {0:?}")]
    UnknownCheck(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
