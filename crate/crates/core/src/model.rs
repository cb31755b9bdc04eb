//! Likelihood, prior and unnormalized posterior over hypergraphs, all in
//! natural-log space.
//!
//! Each hyperedge covering a pair `(i, j)` independently emits that pair with
//! probability `p`, so a pair covered `c` times is observed with probability
//! `1 - (1-p)^c` (noisy-OR). The prior charges `beta` per hyperedge copy and
//! `gamma` per duplicate copy, and forbids edges larger than `max_edge_size`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{check_pair, Hypergraph, PairwiseGraph, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Probability that one hyperedge emits each of its pairs.
    pub p: f64,
    /// Per-hyperedge sparsity weight.
    pub beta: f64,
    /// Penalty per duplicate copy of a hyperedge.
    pub gamma: f64,
    /// Largest admissible hyperedge size `L`.
    pub max_edge_size: usize,
    /// Observed vertex subset; `None` means every vertex is observed.
    pub observed_vertices: Option<BTreeSet<VertexId>>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            p: 0.99,
            beta: 1.0,
            gamma: 5.0,
            max_edge_size: 6,
            observed_vertices: None,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidParams(format!("p must lie in (0,1), got {}", self.p)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParams(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.max_edge_size < 2 {
            return Err(Error::InvalidParams(format!(
                "max edge size must be >= 2, got {}",
                self.max_edge_size
            )));
        }
        Ok(())
    }

    /// `log(1 - p)`.
    #[inline]
    pub fn log_miss(&self) -> f64 {
        (-self.p).ln_1p()
    }

    fn is_observed(&self, v: VertexId) -> bool {
        self.observed_vertices.as_ref().is_none_or(|s| s.contains(&v))
    }
}

/// A log-probability; `-inf` encodes probability zero.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogWeight(pub f64);

impl LogWeight {
    pub const ONE: LogWeight = LogWeight(0.0);
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl Add for LogWeight {
    type Output = LogWeight;
    fn add(self, rhs: LogWeight) -> LogWeight {
        LogWeight(self.0 + rhs.0)
    }
}

impl fmt::Display for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `log P(A_ij = 1)` for a pair covered `count` times.
#[inline]
pub fn log_pair_present(count: u64, log_miss: f64) -> f64 {
    if count == 0 {
        f64::NEG_INFINITY
    } else {
        (-(count as f64 * log_miss).exp_m1()).ln()
    }
}

/// `log P(A_ij = 0)` for a pair covered `count` times.
#[inline]
pub fn log_pair_absent(count: u64, log_miss: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * log_miss
    }
}

/// `P(A_ij = 1 | H) = 1 - (1-p)^{|E_ij|}`.
pub fn edge_prob(h: &Hypergraph, i: VertexId, j: VertexId, params: &ModelParams) -> Result<f64> {
    let count = h.edge_cover_count(i, j)?;
    Ok(-(count as f64 * params.log_miss()).exp_m1())
}

fn check_sizes(g: &PairwiseGraph, h: &Hypergraph) -> Result<()> {
    if g.num_vertices() != h.num_vertices() {
        return Err(Error::VertexCountMismatch {
            graph: g.num_vertices(),
            hypergraph: h.num_vertices(),
        });
    }
    Ok(())
}

/// Likelihood of the whole observed graph under the noisy-OR model.
///
/// Pairs with no covering hyperedge contribute `log 1 = 0` when absent, so only
/// observed edges and covered pairs are visited.
pub fn log_likelihood_full(g: &PairwiseGraph, h: &Hypergraph, params: &ModelParams) -> Result<LogWeight> {
    check_sizes(g, h)?;
    let counts = h.pair_cover_counts();
    let log_miss = params.log_miss();
    let mut total = 0.0;
    for (i, j) in g.edges() {
        let c = counts.get(&(i, j)).copied().unwrap_or(0);
        if c == 0 {
            return Ok(LogWeight::ZERO);
        }
        total += log_pair_present(c, log_miss);
    }
    for (&(i, j), &c) in &counts {
        if !g.has_edge(i, j) {
            total += log_pair_absent(c, log_miss);
        }
    }
    Ok(LogWeight(total))
}

/// Bernoulli likelihood over the pairs covered by at least one hyperedge:
/// each such pair contributes `log p` if observed and `log(1-p)` otherwise.
/// Uncovered pairs do not enter.
pub fn log_likelihood_bernoulli(g: &PairwiseGraph, h: &Hypergraph, params: &ModelParams) -> Result<LogWeight> {
    check_sizes(g, h)?;
    let (log_hit, log_miss) = (params.p.ln(), params.log_miss());
    let total = h
        .pair_cover_counts()
        .keys()
        .map(|&(i, j)| if g.has_edge(i, j) { log_hit } else { log_miss })
        .sum();
    Ok(LogWeight(total))
}

/// Noisy-OR likelihood restricted to pairs with both endpoints in
/// `params.observed_vertices` (all vertices when unset).
pub fn log_likelihood_partial(g_obs: &PairwiseGraph, h: &Hypergraph, params: &ModelParams) -> Result<LogWeight> {
    check_sizes(g_obs, h)?;
    if let Some(obs) = &params.observed_vertices {
        if let Some(&v) = obs.iter().next_back() {
            if v as usize >= h.num_vertices() {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    num_vertices: h.num_vertices(),
                });
            }
        }
    }
    let in_scope = |i: VertexId, j: VertexId| params.is_observed(i) && params.is_observed(j);
    let counts = h.pair_cover_counts();
    let log_miss = params.log_miss();
    let mut total = 0.0;
    for (i, j) in g_obs.edges() {
        if !in_scope(i, j) {
            return Err(Error::EdgeOutsideObserved(i, j));
        }
        let c = counts.get(&(i, j)).copied().unwrap_or(0);
        if c == 0 {
            return Ok(LogWeight::ZERO);
        }
        total += log_pair_present(c, log_miss);
    }
    for (&(i, j), &c) in &counts {
        if in_scope(i, j) && !g_obs.has_edge(i, j) {
            total += log_pair_absent(c, log_miss);
        }
    }
    Ok(LogWeight(total))
}

/// Unnormalized structural prior `-beta |E| - gamma sum(delta - 1)`, or
/// probability zero when some edge exceeds `max_edge_size`.
pub fn log_prior(h: &Hypergraph, params: &ModelParams) -> LogWeight {
    let mut total = 0.0;
    for (e, m) in h.iter() {
        if e.len() > params.max_edge_size {
            return LogWeight::ZERO;
        }
        total -= params.beta * m as f64 + params.gamma * (m - 1) as f64;
    }
    LogWeight(total)
}

/// Unnormalized log-posterior: likelihood plus prior. Uses the partial
/// likelihood when an observed vertex subset is configured.
pub fn log_posterior(g: &PairwiseGraph, h: &Hypergraph, params: &ModelParams) -> Result<LogWeight> {
    let prior = log_prior(h, params);
    let lik = if params.observed_vertices.is_some() {
        log_likelihood_partial(g, h, params)?
    } else {
        log_likelihood_full(g, h, params)?
    };
    if prior.is_zero() || lik.is_zero() {
        return Ok(LogWeight::ZERO);
    }
    Ok(lik + prior)
}

/// Validates a vertex pair against a vertex count.
pub fn validate_pair(i: VertexId, j: VertexId, num_vertices: usize) -> Result<()> {
    check_pair(i, j, num_vertices)
}
