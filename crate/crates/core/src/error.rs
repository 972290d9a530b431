use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} does not fit in 32 bits")]
    ModulusTooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: elements of F_{0} and F_{1}")]
    FieldMismatch(u32, u32),
    #[error("singular linear system")]
    SingularSystem,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("field too small: q = {q} but an MDS code over {n} nodes needs q >= {n}")]
    FieldTooSmall { q: u32, n: usize },
    #[error("expected {expected} distinct shares, got {got}")]
    BadShareCount { expected: usize, got: usize },
    #[error("too few files: K = {0}, symmetric retrieval needs K >= 2")]
    TooFewFiles(usize),
    #[error("universe of {points} points exceeds the ceiling of {ceiling}")]
    UniverseTooLarge { points: u128, ceiling: u128 },
    #[error("protocol failure: {0}")]
    ProtocolFailure(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Format(err.to_string())
    }
}
