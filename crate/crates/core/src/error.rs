use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    Index { index: usize, num_qubits: usize },
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("circuit has {0} unbound parameter slot(s)")]
    Unbound(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("ingestion error at row {row}, column {column}: {message}")]
    Ingestion {
        row: usize,
        column: String,
        message: String,
    },
    #[error("unknown class label {0:?}")]
    Label(String),
    #[error("{features} features exceed the exact enumeration bound of {max}")]
    Combinatorial { features: usize, max: usize },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
