use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph {graph}: node index {index} out of range for {num_nodes} nodes")]
    IndexOutOfRange {
        graph: u64,
        index: usize,
        num_nodes: usize,
    },
    #[error("graph {graph}: relation {relation} out of range for {num_relations} relations")]
    RelationOutOfRange {
        graph: u64,
        relation: usize,
        num_relations: usize,
    },
    #[error("graph {graph}: duplicate edge ({u}, {v}, type {relation})")]
    DuplicateEdge {
        graph: u64,
        u: usize,
        v: usize,
        relation: usize,
    },
    #[error("graph {graph}: self-loop on node {node} (self-connections are implicit)")]
    SelfLoop { graph: u64, node: usize },
    #[error("graph {graph}: edge ({u}, {v}) not stored with u <= v")]
    UnorderedEdge { graph: u64, u: usize, v: usize },
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("{metric} needs at least {min} nodes, graph has {found}")]
    TooFewNodes {
        metric: &'static str,
        min: usize,
        found: usize,
    },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("column {column} is constant; min-max normalization undefined")]
    ConstantColumn { column: usize },
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("matrix not positive definite (leading minor {minor} failed){hint}")]
    NotPositiveDefinite { minor: usize, hint: &'static str },
    #[error("non-finite gradient for parameter `{0}`")]
    NonFiniteGradient(String),
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    TrainingDiverged { epoch: usize, loss: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("ensemble sampler stuck: no proposal accepted for {0} consecutive sweeps")]
    SamplerStuck(usize),
    #[error("every graph in the pool has been evaluated")]
    PoolExhausted,
    #[error("unknown situation `{0}` (expected a, b, c or d)")]
    UnknownSituation(String),
    #[error("objective failed on graph {graph}: {reason}")]
    Objective { graph: u64, reason: String },
    #[error("degenerate pool: {0}")]
    DegeneratePool(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
