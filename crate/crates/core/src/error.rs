use thiserror::Error;

/// Errors raised by the norm, inequality and factorization routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("p = {p} lies outside the exponent domain [{lo}, {hi}]")]
    Domain { p: f64, lo: f64, hi: f64 },

    #[error("exponent value {0} is out of range")]
    Range(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("probability weight {value:e} at index {index} is below the admissible floor")]
    ZeroWeight { index: usize, value: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("|x|^e overflowed at index {index}; rescale the input (norms are homogeneous)")]
    Overflow { index: usize },

    #[error("invalid argument: {0}")]
    Arg(String),

    #[error("inconsistent evaluation: {0}")]
    Inconsistency(String),

    #[error("tail bound cannot be certified: {0}")]
    Tail(String),

    #[error("reciprocal exponents sum to {sum}, expected 1")]
    Conjugacy { sum: f64 },

    #[error("strictly positive entries required; found {value} at index {index}")]
    Positivity { index: usize, value: f64 },

    #[error("function vanishes identically; extremal witness undefined")]
    ZeroFunction,

    #[error("grid is not uniformly spaced: {0}")]
    NonUniformGrid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
