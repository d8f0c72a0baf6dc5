use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("invalid level: {0}")]
    InvalidLevel(String),
    #[error("containment violated: {0}")]
    ContainmentViolated(String),
    #[error("cover does not cover the target set")]
    CoverIncomplete,
    #[error("division by zero")]
    DivideByZero,
    #[error("cyclotomic level {0} exceeds the cap of {cap}", cap = crate::cyclotomic::MAX_LEVEL)]
    LevelCap(u32),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("not in domain: {0}")]
    NotInDomain(String),
    #[error("non-integrable: {0}")]
    NonIntegrable(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("invalid stratification: {0}")]
    InvalidStratification(String),
    #[error("size limit exceeded: {0}")]
    TooLarge(String),
}
