use thiserror::Error;

/// Errors raised across the classification toolkit.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parameter identity violated: {0}")]
    ParameterIdentityViolation(String),
    #[error("permutation degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("invalid orbit matrix: {0}")]
    InvalidOrbitMatrix(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not an automorphism of the design")]
    NotAnAutomorphism,
    #[error("design parameters differ: {0}")]
    ParamMismatch(String),
    #[error("not Hadamard parameters: {0}")]
    NotHadamardParameters(String),
    #[error("unknown point {0}")]
    UnknownPoint(usize),
    #[error("store incomplete: {0}")]
    StoreIncomplete(String),
    #[error("search too large: {0} (rerun with force)")]
    SearchTooLarge(String),
    #[error("group too large to enumerate: order {0}")]
    GroupTooLarge(u128),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
