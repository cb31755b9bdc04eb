//! Bayesian reconstruction of hypergraphs from their pairwise projections.
//!
//! A hypergraph is projected to a graph (every hyperedge becomes a clique),
//! optionally sent through a noisy channel, and recovered by a
//! Metropolis-Hastings sampler over hypergraphs whose posterior combines a
//! noisy-OR pair likelihood with a parsimony prior.

pub mod channel;
pub mod cliques;
pub mod error;
pub mod experiments;
pub mod format;
pub mod hypergraph;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod sampler;

pub use error::{Error, Result};
pub use hypergraph::{pair, Hyperedge, Hypergraph, Pair, PairwiseGraph, VertexId};
pub use model::{log_posterior, LogWeight, ModelParams};
pub use sampler::{run, SamplerConfig, SamplerTrace};
