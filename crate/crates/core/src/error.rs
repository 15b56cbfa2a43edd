use thiserror::Error;

use crate::graph::Vertex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge list is empty")]
    EmptyGraph,
    #[error("loop edge at vertex {0}")]
    LoopEdge(Vertex),
    #[error("edge ({0}, {1}) given in both orientations with inconsistent weight or phase")]
    AsymmetricConflict(Vertex, Vertex),
    #[error("graph is disconnected: {0} is unreachable from {1}")]
    Disconnected(Vertex, Vertex),
    #[error("non-positive weight {value} at {what}")]
    NonpositiveWeight { what: String, value: f64 },
    #[error("negative edge weight {value} on ({x}, {y})")]
    NegativeEdgeWeight { x: Vertex, y: Vertex, value: f64 },
    #[error("phase {value} on ({x}, {y}) lies outside [-pi, pi]")]
    PhaseOutOfRange { x: Vertex, y: Vertex, value: f64 },
    #[error("unknown vertex {0}")]
    UnknownVertex(Vertex),
    #[error("offspring count b_{index} must be at least 1")]
    InvalidOffspring { index: usize },
    #[error("sphere size overflow at depth {0}")]
    Overflow(usize),
    #[error("operation requires a finite (explicit) graph")]
    NotFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("section is not bipartite: ({0}, {1}) joins vertices of equal parity")]
    NotBipartite(Vertex, Vertex),
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("vertex sets differ at {0}")]
    VertexSetMismatch(Vertex),
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("requested {k} eigenvalues of a {dim}-dimensional operator")]
    BadK { k: usize, dim: usize },
    #[error("spectrum only certified below {certified}; cannot count at {lambda}")]
    IncompleteSpectrum { lambda: f64, certified: f64 },
    #[error("section size {size} exceeds the exhaustive cap {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("filtration is not nested at step {0}")]
    NotNested(usize),
    #[error("gamma must be positive, got {0}")]
    BadGamma(f64),
    #[error("lambda + d(x) + V(x) vanishes at {0}")]
    ShiftHitsZero(Vertex),
    #[error("seminorm C_{order} grows with the sampling window; function is not in the claimed class")]
    SeminormUnbounded { order: usize },
    #[error("quadrature did not reach tolerance {tol:e} (last refinement change {last:e})")]
    QuadratureDivergence { tol: f64, last: f64 },
    #[error("quadrature node {0} lies on the real axis")]
    ResolventSingularity(f64),
    #[error("unknown suite '{0}'")]
    SuiteUnknown(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
