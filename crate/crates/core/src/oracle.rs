//! Exhaustive ground truth on tiny graphs.
//!
//! Candidate hyperedges are all cliques of the observed graph with `2..=L`
//! vertices: any hyperedge containing a non-adjacent pair would project an
//! unobserved edge, so nothing valid is excluded. Cliques are found by a
//! direct subset scan, independent of [`crate::cliques`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::write_hypergraph;
use crate::hypergraph::{Hyperedge, Hypergraph, PairwiseGraph, VertexId};
use crate::model::{log_pair_present, log_posterior, ModelParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationBounds {
    pub max_vertices: usize,
    pub max_multiplicity: u32,
    pub max_edge_size: usize,
    /// Largest admissible `(max_multiplicity + 1)^candidates` for full
    /// enumeration, and node budget for the branch-and-bound MAP search.
    pub max_states: f64,
}

impl EnumerationBounds {
    pub fn new(max_edge_size: usize) -> Self {
        EnumerationBounds {
            max_vertices: 6,
            max_multiplicity: 2,
            max_edge_size,
            max_states: 1e8,
        }
    }
}

/// All cliques of `g` with between 2 and `max_edge_size` vertices, ordered by
/// decreasing size, then lexicographically.
pub fn candidate_edges(g: &PairwiseGraph, max_edge_size: usize) -> Vec<Hyperedge> {
    let n = g.num_vertices();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let size = mask.count_ones() as usize;
        if size < 2 || size > max_edge_size {
            continue;
        }
        let vs: Vec<VertexId> = (0..n as VertexId).filter(|&v| mask >> v & 1 == 1).collect();
        let clique = vs
            .iter()
            .enumerate()
            .all(|(a, &i)| vs[a + 1..].iter().all(|&j| g.has_edge(i, j)));
        if clique {
            out.push(Hyperedge::new(vs).expect("distinct vertices"));
        }
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    out
}

/// Shared search layout: pairs of `g` indexed densely, per-candidate pair
/// lists, and how much cover each pair can still receive from candidates at
/// or after a given depth.
struct Layout {
    candidates: Vec<Hyperedge>,
    cand_pairs: Vec<Vec<usize>>,
    /// `remaining[d][p]`: number of candidates with index >= d covering pair p
    remaining: Vec<Vec<u32>>,
    num_pairs: usize,
    pair_in_scope: Vec<bool>,
}

impl Layout {
    fn new(g: &PairwiseGraph, bounds: &EnumerationBounds, params: Option<&ModelParams>) -> Result<Self> {
        if g.num_vertices() > bounds.max_vertices {
            return Err(Error::InvalidParams(format!(
                "oracle limited to {} vertices, graph has {}",
                bounds.max_vertices,
                g.num_vertices()
            )));
        }
        let pairs: Vec<(VertexId, VertexId)> = g.edges().collect();
        let index: HashMap<(VertexId, VertexId), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let candidates = candidate_edges(g, bounds.max_edge_size);
        let cand_pairs: Vec<Vec<usize>> = candidates
            .iter()
            .map(|c| c.pairs().map(|p| index[&p]).collect())
            .collect();
        let mut remaining = vec![vec![0u32; pairs.len()]; candidates.len() + 1];
        for d in (0..candidates.len()).rev() {
            remaining[d] = remaining[d + 1].clone();
            for &p in &cand_pairs[d] {
                remaining[d][p] += 1;
            }
        }
        let pair_in_scope = pairs
            .iter()
            .map(|&(i, j)| {
                params
                    .and_then(|pr| pr.observed_vertices.as_ref())
                    .is_none_or(|obs| obs.contains(&i) && obs.contains(&j))
            })
            .collect();
        Ok(Layout {
            candidates,
            cand_pairs,
            remaining,
            num_pairs: pairs.len(),
            pair_in_scope,
        })
    }

    fn feasible(&self, depth: usize, cover: &[u32]) -> bool {
        (0..self.num_pairs).all(|p| cover[p] > 0 || self.remaining[depth][p] > 0)
    }

    fn build(&self, n: usize, mult: &[u32]) -> Hypergraph {
        let mut h = Hypergraph::new(n);
        for (c, &m) in self.candidates.iter().zip(mult) {
            if m > 0 {
                h.add_edge(c.clone(), m).expect("candidate in range");
            }
        }
        h
    }
}

fn check_space(num_candidates: usize, bounds: &EnumerationBounds) -> Result<()> {
    let size = (bounds.max_multiplicity as f64 + 1.0).powi(num_candidates as i32);
    if size > bounds.max_states {
        return Err(Error::SearchSpaceTooLarge {
            size,
            limit: bounds.max_states,
        });
    }
    Ok(())
}

/// Every hypergraph over candidate cliques (multiplicities
/// `0..=max_multiplicity`) whose projection equals `g`.
pub fn enumerate_valid(g: &PairwiseGraph, bounds: &EnumerationBounds) -> Result<Vec<Hypergraph>> {
    let layout = Layout::new(g, bounds, None)?;
    check_space(layout.candidates.len(), bounds)?;
    let mut out = Vec::new();
    let mut mult = vec![0u32; layout.candidates.len()];
    let mut cover = vec![0u32; layout.num_pairs];
    enumerate_rec(
        &layout,
        g.num_vertices(),
        bounds.max_multiplicity,
        0,
        &mut mult,
        &mut cover,
        &mut out,
    );
    Ok(out)
}

fn enumerate_rec(
    layout: &Layout,
    n: usize,
    max_mult: u32,
    depth: usize,
    mult: &mut Vec<u32>,
    cover: &mut Vec<u32>,
    out: &mut Vec<Hypergraph>,
) {
    if !layout.feasible(depth, cover) {
        return;
    }
    if depth == layout.candidates.len() {
        out.push(layout.build(n, mult));
        return;
    }
    for m in 0..=max_mult {
        mult[depth] = m;
        for &p in &layout.cand_pairs[depth] {
            cover[p] += m;
        }
        enumerate_rec(layout, n, max_mult, depth + 1, mult, cover, out);
        for &p in &layout.cand_pairs[depth] {
            cover[p] -= m;
        }
    }
    mult[depth] = 0;
}

/// Exact MAP over the same state space as [`enumerate_valid`], found by
/// branch and bound. Ties within `1e-12` go to the lexicographically smallest
/// serialization.
pub fn exact_map(g: &PairwiseGraph, params: &ModelParams, bounds: &EnumerationBounds) -> Result<(Hypergraph, f64)> {
    params.validate()?;
    let layout = Layout::new(g, bounds, Some(params))?;
    let mut search = MapSearch {
        layout: &layout,
        g,
        params,
        max_mult: bounds.max_multiplicity,
        log_miss: params.log_miss(),
        best: None,
        nodes: 0,
        budget: bounds.max_states,
    };
    let mut mult = vec![0u32; layout.candidates.len()];
    let mut cover = vec![0u32; layout.num_pairs];
    search.visit(0, 0.0, &mut mult, &mut cover)?;
    search
        .best
        .map(|(h, lp, _)| (h, lp))
        .ok_or_else(|| Error::InvalidParams("no valid hypergraph within bounds".into()))
}

struct MapSearch<'a> {
    layout: &'a Layout,
    g: &'a PairwiseGraph,
    params: &'a ModelParams,
    max_mult: u32,
    log_miss: f64,
    best: Option<(Hypergraph, f64, String)>,
    nodes: u64,
    budget: f64,
}

impl MapSearch<'_> {
    fn upper_bound(&self, depth: usize, prior: f64, cover: &[u32]) -> f64 {
        let lik: f64 = (0..self.layout.num_pairs)
            .filter(|&p| self.layout.pair_in_scope[p])
            .map(|p| {
                let reach = cover[p] + self.max_mult * self.layout.remaining[depth][p];
                log_pair_present(reach as u64, self.log_miss)
            })
            .sum();
        prior + lik
    }

    fn visit(&mut self, depth: usize, prior: f64, mult: &mut Vec<u32>, cover: &mut Vec<u32>) -> Result<()> {
        self.nodes += 1;
        if self.nodes as f64 > self.budget {
            return Err(Error::SearchSpaceTooLarge {
                size: self.nodes as f64,
                limit: self.budget,
            });
        }
        if !self.layout.feasible(depth, cover) {
            return Ok(());
        }
        if let Some((_, best, _)) = &self.best {
            if self.upper_bound(depth, prior, cover) < best - 1e-9 {
                return Ok(());
            }
        }
        if depth == self.layout.candidates.len() {
            let h = self.layout.build(self.g.num_vertices(), mult);
            let lp = log_posterior(self.g, &h, self.params)?.value();
            let text = write_hypergraph(&h);
            let better = match &self.best {
                None => true,
                Some((_, b, bt)) => lp > b + 1e-12 || ((lp - b).abs() <= 1e-12 && text < *bt),
            };
            if better {
                self.best = Some((h, lp, text));
            }
            return Ok(());
        }
        let (beta, gamma) = (self.params.beta, self.params.gamma);
        // ascending multiplicity: sparse states come first and tighten the incumbent
        for m in 0..=self.max_mult {
            let cost = if m == 0 {
                0.0
            } else {
                beta * m as f64 + gamma * (m - 1) as f64
            };
            mult[depth] = m;
            for &p in &self.layout.cand_pairs[depth] {
                cover[p] += m;
            }
            let res = self.visit(depth + 1, prior - cost, mult, cover);
            for &p in &self.layout.cand_pairs[depth] {
                cover[p] -= m;
            }
            res?;
        }
        mult[depth] = 0;
        Ok(())
    }
}

/// Normalized posterior over [`enumerate_valid`].
#[derive(Clone, Debug)]
pub struct PosteriorTable {
    pub entries: Vec<(Hypergraph, f64)>,
}

impl PosteriorTable {
    pub fn probability(&self, h: &Hypergraph) -> f64 {
        self.entries.iter().find(|(e, _)| e == h).map_or(0.0, |(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn to_map(&self) -> HashMap<Hypergraph, f64> {
        self.entries.iter().cloned().collect()
    }
}

pub fn exact_posterior_table(
    g: &PairwiseGraph,
    params: &ModelParams,
    bounds: &EnumerationBounds,
) -> Result<PosteriorTable> {
    let states = enumerate_valid(g, bounds)?;
    let logs = states
        .iter()
        .map(|h| log_posterior(g, h, params).map(|w| w.value()))
        .collect::<Result<Vec<f64>>>()?;
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    let entries = states
        .into_iter()
        .zip(logs)
        .map(|(h, l)| (h, (l - top).exp() / norm))
        .collect();
    Ok(PosteriorTable { entries })
}
