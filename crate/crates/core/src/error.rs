use thiserror::Error;

/// Errors raised by the laboratory's constructions and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("prime {value} exceeds the configured maximum {max}")]
    PrimeTooLarge { value: u64, max: u64 },
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("matrix has determinant {det} mod {modulus}, expected 1")]
    NotSpecialLinear { det: u64, modulus: u64 },
    #[error("zero vector has no projective class")]
    ZeroVector,
    #[error("group closure exceeded cap {cap} (reached {reached} elements)")]
    ClosureCap { cap: usize, reached: usize },
    #[error("closure has {found} elements, expected {expected}")]
    OrderMismatch { found: usize, expected: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("invalid norm index p = {0}")]
    InvalidP(f64),
    #[error("exact norm requested for p = {0}; only p in {{1, 2, inf}} is exact")]
    InexactP(f64),
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("singular value decomposition failed to converge")]
    SvdFailure,
    #[error("eigensolver failed")]
    EigenFailure,
    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),
    #[error("input not on the unit sphere (norm {0})")]
    OffSphere(f64),
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("graph has {n} vertices, above the limit of {max}")]
    GraphTooLarge { n: usize, max: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unknown generator tag {0}")]
    UnknownGenerator(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Parse(e.to_string())
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
