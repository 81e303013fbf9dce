use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty edge list")]
    EmptyEdgeList,

    #[error("node index {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),

    #[error("edge weight {0} is not a positive finite number")]
    InvalidWeight(f64),

    #[error("negative edge weight {0}; shortest paths require nonnegative weights")]
    NegativeWeight(f64),

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("label sets differ: {0}")]
    LabelMismatch(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("isolated node has no layer copy: {0:?}")]
    IsolatedNode(String),

    #[error("smoothing underflow in row {row} (alpha = {alpha})")]
    SmoothingUnderflow { row: usize, alpha: f64 },

    #[error("smoothing overflow in row {row} (alpha = {alpha})")]
    SmoothingOverflow { row: usize, alpha: f64 },

    #[error("power-law smoothing evaluated at distance 0")]
    PowerLawAtZero,

    #[error("teleportation factor c = {0} outside (0, 1]")]
    InvalidTeleportFactor(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("power iteration did not converge in {iterations} sweeps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("chain not ergodic in norm-1 (tau1 = {0})")]
    NotErgodic(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("graph with {n} nodes exceeds the dense limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("graph too small: {0}")]
    TooSmall(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
