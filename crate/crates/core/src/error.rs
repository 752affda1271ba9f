use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operands belong to different fields (q={left} vs q={right})")]
    FieldMismatch { left: u64, right: u64 },

    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("modulus {0} is outside the supported range [2, 2^62]")]
    ModulusOutOfRange(u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("evaluation points are not pairwise distinct")]
    DegeneratePoints,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient data: need {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("points are inconsistent with a polynomial of degree at most {degree_bound}")]
    Inconsistent { degree_bound: usize },

    #[error("no codeword of degree at most {degree_bound} within {max_errors} errors")]
    DecodingFailure { degree_bound: usize, max_errors: usize },

    #[error("decoded results exceed the adversary threshold ({max_errors} tolerated)")]
    AdversaryThresholdExceeded { max_errors: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("signing failed after {attempts} vinegar samples")]
    SigningFailure { attempts: usize },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("wallet does not own UTXO (shard {shard}, index {index})")]
    Ownership { shard: usize, index: usize },

    #[error("shard is empty")]
    EmptyShard,

    #[error("node {0} is missing a coded input")]
    IncompleteNode(usize),

    #[error("indicators missing: expected {expected}, got {got}")]
    IncompleteDecode { expected: usize, got: usize },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
