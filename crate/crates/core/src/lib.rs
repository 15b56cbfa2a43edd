//! Magnetic discrete Laplacians on weighted graphs.
//!
//! Graphs `(V, E, m, θ)` are described by generator rules or explicit edge
//! lists, cut into finite Dirichlet sections, assembled into Hermitian
//! matrices in the `m`-conjugated frame and solved. The [`verify`] module
//! evaluates quadratic forms directly and checks form inequalities, and
//! [`funcalc`] implements the Helffer–Sjöstrand functional calculus.

pub mod error;
pub mod funcalc;
pub mod generators;
pub mod graph;
pub mod operators;
pub mod section;
pub mod sparse;
pub mod spectral;
pub mod suites;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{build_graph, parity_map, weighted_degree, Edge, EdgeRecord, Graph, GraphDescription, ParityMap, Vertex};
pub use section::{ball_section, block_section, FiniteSection};
