use thiserror::Error;

/// Errors raised anywhere in the knitting pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {qubit} out of range for {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("parameter slot {slot} out of range (num_params = {num_params})")]
    SlotOutOfRange { slot: usize, num_params: usize },
    #[error("expected {expected} parameters, got {got}")]
    ParameterLength { expected: usize, got: usize },
    #[error("circuit has an unbound parameter slot {0}")]
    UnboundParameter(usize),
    #[error("dimension mismatch: expected {expected} qubits, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ansatz must have at least one layer")]
    EmptyAnsatz,
    #[error("capacity exceeded: {what} supports at most {limit}, got {got}")]
    CapacityExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    #[error(
        "infeasible partition: {blocks} blocks of capacity {capacity} cannot hold {nodes} nodes"
    )]
    InfeasiblePartition {
        nodes: usize,
        blocks: usize,
        capacity: usize,
    },
    #[error("invalid partition plan: {0}")]
    InvalidPlan(String),
    #[error("gate {kind} at position {position} cannot be cut")]
    UnsupportedCut { kind: String, position: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("parameter {slot} is not attached to a Pauli rotation")]
    NonRotationParameter { slot: usize },
    #[error("training diverged at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("optimal cut is zero; approximation ratio undefined")]
    ZeroOptimum,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no candidate survived the overhead threshold {eta}")]
    EmptyFeasibleSpace { eta: f64 },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
