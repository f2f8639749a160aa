use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("m = {m} exceeds the matrix cap {cap} (set NOGOLAB_CAP to raise it)")]
    CapExceeded { m: usize, cap: usize },

    #[error("invalid widths m = {m}, n = {n}: {reason}")]
    InvalidWidths { m: usize, n: usize, reason: &'static str },

    #[error("label {z} has no preimage")]
    NoPreimage { z: u32 },

    #[error("states are not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("operator is not {expected} (residual {residual:.3e})")]
    WrongKind { expected: &'static str, residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("measurement outcome {outcome} has probability {probability:.3e}")]
    DegenerateOutcome { outcome: usize, probability: f64 },

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("codomain of size {size} leaves nothing after excluding the target")]
    CodomainTooSmall { size: usize },

    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    #[error("expected count {expected:.3} in bin {bin} is below {min}")]
    InsufficientTrials { bin: usize, expected: f64, min: f64 },

    #[error("expected count {expected:.3} in bin {bin} is below 5")]
    SparseBins { bin: usize, expected: f64 },

    #[error("set is not orthogonal with duplication")]
    NotOrthogonal,

    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("oracle slot {0} is not assigned")]
    UnknownSlot(usize),

    #[error("oracle in slot {0} is not a classical oracle")]
    NotClassicalOracle(usize),

    #[error("oracles differ outside the declared set at call {call}, input {input}")]
    InconsistentModification { call: usize, input: usize },

    #[error("no message observed")]
    NoMessageObserved,

    #[error("sampler failed: {0}")]
    SamplerFailure(String),

    #[error("message must be non-empty")]
    EmptyMessage,

    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),

    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
