use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("q = {0} is even; only odd characteristic is supported")]
    EvenCharacteristic(u64),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("q^n = {size} exceeds the brute-force ceiling {ceiling}")]
    CeilingExceeded { size: String, ceiling: u64 },
    #[error("{0} does not divide q^n - 1")]
    NotDivisor(String),
    #[error("{0} does not divide x^n - 1")]
    NotPolyDivisor(String),
    #[error("element is not normal")]
    NotNormal,
    #[error("the zero element has no multiplicative order")]
    ZeroElement,
    #[error("nu = {nu} is outside the validity region (need nu > {min})")]
    InvalidNu { nu: f64, min: f64 },
    #[error("invalid sieve configuration: D = {0} is not positive")]
    InvalidSieve(String),
    #[error("k = {k} admits no degree-k divisor of x^{n} - 1")]
    NoAdmissibleG { n: u32, k: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
