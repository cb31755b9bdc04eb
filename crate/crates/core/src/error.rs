use thiserror::Error;

use crate::hypergraph::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hyperedge must contain at least 2 distinct vertices, got {0}")]
    EdgeTooSmall(usize),
    #[error("duplicate vertex {0} in hyperedge")]
    DuplicateVertex(VertexId),
    #[error("vertex {vertex} out of range for {num_vertices} vertices")]
    VertexOutOfRange { vertex: VertexId, num_vertices: usize },
    #[error("invalid vertex pair ({0}, {1})")]
    InvalidPair(VertexId, VertexId),
    #[error("multiplicity must be >= 1")]
    ZeroMultiplicity,
    #[error("vertex count mismatch: graph has {graph}, hypergraph has {hypergraph}")]
    VertexCountMismatch { graph: usize, hypergraph: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("maximal clique enumeration exceeded cap of {cap} cliques")]
    CliqueCapExceeded { cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("observed edge ({0}, {1}) lies outside the observed vertex set")]
    EdgeOutsideObserved(VertexId, VertexId),
    #[error("search space of {size:.3e} states exceeds limit {limit:.0e}")]
    SearchSpaceTooLarge { size: f64, limit: f64 },
    #[error("frame for {num_vertices} vertices exceeds cap of {cap}")]
    FrameTooLarge { num_vertices: usize, cap: usize },
    #[error("dataset is empty: {0}")]
    EmptyDataset(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
