use thiserror::Error;

use crate::graph::{EdgeId, EndRef, VertexId, Violation};

/// A move or graph operation whose preconditions do not hold.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<Violation>),
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("id `{0}` is already in use")]
    IdInUse(String),
    #[error("edge end {0} is not collapsible")]
    NotCollapsible(EndRef),
    #[error("end {end} is not at vertex `{vertex}`")]
    EndNotAtVertex { end: EndRef, vertex: VertexId },
    #[error("label {label} of end {end} is not divisible by {divisor}")]
    Divisibility { end: EndRef, label: i64, divisor: i64 },
    #[error("cannot slide end {0} over its own edge")]
    SelfSlide(EndRef),
    #[error("edge `{0}` is not a loop")]
    NotLoop(EdgeId),
    #[error("loop `{0}` is not ascending at the given side")]
    NotAscending(EdgeId),
    #[error("graph is not reduced")]
    NotReduced,
    #[error("label arithmetic overflow")]
    Overflow,
    #[error("{0}")]
    Precondition(String),
}

impl MoveError {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        MoveError::Precondition(msg.into())
    }
}

/// Failures of the Whitehead machinery and the deformation pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error("endpoint graph is not reduced")]
    EndpointNotReduced,
    #[error("edge set is not a forest: {0}")]
    NotForest(String),
    #[error("forest cannot be collapsed; blocked edges: {0:?}")]
    NotCollapsibleForest(Vec<EdgeId>),
    #[error("forests share edge `{0}`")]
    SharedEdge(EdgeId),
    #[error("forest is trivial")]
    TrivialForest,
    #[error("collapse result is not reduced")]
    NotReducedResult,
    #[error("configuration mismatch: {0}")]
    Configuration(String),
    #[error("step {step}: {reason}")]
    BadStep { step: usize, reason: String },
    #[error("graph exceeds bounds: {0}")]
    OutOfBounds(String),
    #[error("bounds too tight: {0}")]
    BoundsTooTight(String),
    #[error("internal invariant failure: {0}")]
    Internal(String),
}
