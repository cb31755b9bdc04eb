//! Metropolis-Hastings random walk over hypergraphs whose clique projection
//! equals the observed graph.
//!
//! Each iteration draws a target `e` uniformly from the candidate pool (the
//! maximal cliques of the observed graph), then with probability 1/2 adds a
//! random sub-hyperedge of `e` (size uniform in `2..=min(|e|, L)`, then a
//! uniform subset of that size) or removes a uniformly chosen sub-hyperedge of
//! `e` that is currently present. The Hastings correction is computed exactly
//! from both directions of the move: a sub-hyperedge contained in several
//! candidates can be proposed through any of them.
//!
//! Candidates are fixed for the whole run, so a hyperedge removed entirely can
//! always be proposed again; this keeps the chain irreducible over every cover
//! built from cliques of size at most `L`.
//!
//! The random stream is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`),
//! so a run is a pure function of its inputs and seed.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use indexmap::{IndexMap, IndexSet};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cliques::{maximal_cliques_capped, DEFAULT_CLIQUE_CAP};
use crate::error::{Error, Result};
use crate::hypergraph::{pair, Hyperedge, Hypergraph, Pair, PairwiseGraph, VertexId};
use crate::metrics::binary_entropy;
use crate::model::{log_pair_present, log_posterior, ModelParams};

/// Minimum log-posterior gain for a later state to replace the running MAP.
/// Absorbs rounding drift in the incrementally maintained posterior.
const MAP_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub iterations: u64,
    pub seed: u64,
    pub params: ModelParams,
    pub burn_in: u64,
    pub record_trace: bool,
    /// Keep every `trace_stride`-th record (1 keeps all).
    pub trace_stride: u64,
    /// Reject candidates whose projection differs from the observed graph.
    pub enforce_projection: bool,
    /// Recompute the full projection after every accepted move and count
    /// mismatches.
    pub verify_projection: bool,
    pub clique_cap: usize,
}

impl SamplerConfig {
    pub fn new(iterations: u64, seed: u64, params: ModelParams) -> Self {
        SamplerConfig {
            iterations,
            seed,
            params,
            burn_in: iterations / 10,
            record_trace: true,
            trace_stride: 1,
            enforce_projection: true,
            verify_projection: false,
            clique_cap: DEFAULT_CLIQUE_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.iterations == 0 {
            return Err(Error::InvalidParams("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidParams(format!(
                "burn-in {} must be smaller than iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.trace_stride == 0 {
            return Err(Error::InvalidParams("trace stride must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    AddSub,
    RemoveSub,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposalMove {
    pub kind: MoveKind,
    /// The candidate hyperedge the move was drawn from.
    pub target: Hyperedge,
    pub sub: Hyperedge,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Proposal {
    /// A removal drawn on a target with no present sub-hyperedge; the state is
    /// kept and the step counts as accepted with `alpha = 1`.
    Null,
    Move {
        candidate: Hypergraph,
        mv: ProposalMove,
        /// `log Q(old | new) - log Q(new | old)`.
        log_q_ratio: f64,
    },
}

/// The fixed pool of targets and the move probabilities derived from it.
#[derive(Clone, Debug)]
pub struct ProposalKernel {
    candidates: Vec<Hyperedge>,
    by_vertex: Vec<Vec<u32>>,
    max_edge_size: usize,
}

impl ProposalKernel {
    /// Uses the maximal cliques of `g` as targets.
    pub fn new(g: &PairwiseGraph, max_edge_size: usize, clique_cap: usize) -> Result<Self> {
        let candidates = maximal_cliques_capped(g, clique_cap)?;
        Ok(Self::from_candidates(g.num_vertices(), candidates, max_edge_size))
    }

    pub fn from_candidates(num_vertices: usize, candidates: Vec<Hyperedge>, max_edge_size: usize) -> Self {
        let mut by_vertex = vec![Vec::new(); num_vertices];
        for (k, c) in candidates.iter().enumerate() {
            for &v in c.vertices() {
                by_vertex[v as usize].push(k as u32);
            }
        }
        ProposalKernel {
            candidates,
            by_vertex,
            max_edge_size,
        }
    }

    pub fn candidates(&self) -> &[Hyperedge] {
        &self.candidates
    }

    /// Indices of candidates that contain `sub`.
    pub fn containing(&self, sub: &Hyperedge) -> Vec<u32> {
        let anchor = sub
            .vertices()
            .iter()
            .min_by_key(|&&v| self.by_vertex[v as usize].len())
            .expect("hyperedges are non-empty");
        self.by_vertex[*anchor as usize]
            .iter()
            .copied()
            .filter(|&k| sub.is_subset_of(&self.candidates[k as usize]))
            .collect()
    }

    fn size_range(&self, target: usize) -> usize {
        self.candidates[target].len().min(self.max_edge_size)
    }

    /// Probability that an ADD drawn on `target` produces a specific
    /// sub-hyperedge of size `sub_len`.
    fn add_weight(&self, target: usize, sub_len: usize) -> f64 {
        let top = self.size_range(target);
        if sub_len < 2 || sub_len > top {
            return 0.0;
        }
        1.0 / ((top - 1) as f64 * binomial(self.candidates[target].len(), sub_len))
    }

    fn draw_sub<R: Rng>(&self, target: usize, rng: &mut R) -> Hyperedge {
        let c = &self.candidates[target];
        let size = rng.random_range(2..=self.size_range(target));
        let mut picks = index::sample(rng, c.len(), size).into_vec();
        picks.sort_unstable();
        Hyperedge::from_sorted_unchecked(picks.into_iter().map(|k| c.vertices()[k]).collect())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn present_subs(state: &Hypergraph, target: &Hyperedge) -> Vec<Hyperedge> {
    state
        .distinct_edges()
        .filter(|e| e.is_subset_of(target))
        .cloned()
        .collect()
}

/// Exact `log Q(state | next) - log Q(next | state)` for applying `mv` to
/// `state`, evaluated directly on the hypergraph.
pub fn log_q_ratio(kernel: &ProposalKernel, state: &Hypergraph, mv: &ProposalMove) -> f64 {
    let holders = kernel.containing(&mv.sub);
    let present_after = |k: u32, delta: i64| present_subs(state, &kernel.candidates[k as usize]).len() as i64 + delta;
    let add_total: f64 = holders
        .iter()
        .map(|&k| kernel.add_weight(k as usize, mv.sub.len()))
        .sum();
    match mv.kind {
        MoveKind::AddSub => {
            let fresh = state.multiplicity(&mv.sub) == 0;
            let remove_total: f64 = holders
                .iter()
                .map(|&k| 1.0 / present_after(k, fresh as i64) as f64)
                .sum();
            remove_total.ln() - add_total.ln()
        }
        MoveKind::RemoveSub => {
            let remove_total: f64 = holders.iter().map(|&k| 1.0 / present_after(k, 0) as f64).sum();
            add_total.ln() - remove_total.ln()
        }
    }
}

fn apply_move(state: &Hypergraph, kind: MoveKind, sub: &Hyperedge) -> Hypergraph {
    let mut next = state.clone();
    match kind {
        MoveKind::AddSub => next.add_edge(sub.clone(), 1).expect("sub lies inside a candidate"),
        MoveKind::RemoveSub => {
            next.remove_one(sub);
        }
    }
    next
}

/// Reference proposal evaluated directly on a [`Hypergraph`].
pub fn propose<R: Rng>(kernel: &ProposalKernel, state: &Hypergraph, rng: &mut R) -> Proposal {
    if kernel.candidates.is_empty() {
        return Proposal::Null;
    }
    let target = rng.random_range(0..kernel.candidates.len());
    let kind = if rng.random_bool(0.5) {
        MoveKind::AddSub
    } else {
        MoveKind::RemoveSub
    };
    let sub = match kind {
        MoveKind::AddSub => kernel.draw_sub(target, rng),
        MoveKind::RemoveSub => {
            let present = present_subs(state, &kernel.candidates[target]);
            if present.is_empty() {
                return Proposal::Null;
            }
            present[rng.random_range(0..present.len())].clone()
        }
    };
    let mv = ProposalMove {
        kind,
        target: kernel.candidates[target].clone(),
        sub,
    };
    let log_q_ratio = log_q_ratio(kernel, state, &mv);
    Proposal::Move {
        candidate: apply_move(state, kind, &mv.sub),
        mv,
        log_q_ratio,
    }
}

/// Metropolis-Hastings acceptance probability
/// `min(1, exp(logpost(new) - logpost(old) + log_q_ratio))`.
pub fn acceptance(
    g: &PairwiseGraph,
    h_old: &Hypergraph,
    h_new: &Hypergraph,
    log_q_ratio: f64,
    params: &ModelParams,
) -> Result<f64> {
    let old = log_posterior(g, h_old, params)?;
    if old.is_zero() {
        return Err(Error::InvalidParams(
            "current state has zero posterior probability".into(),
        ));
    }
    let new = log_posterior(g, h_new, params)?;
    Ok(alpha_from_log_ratio(new.value() - old.value() + log_q_ratio))
}

fn alpha_from_log_ratio(log_ratio: f64) -> f64 {
    if log_ratio.is_nan() || log_ratio == f64::NEG_INFINITY {
        0.0
    } else if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

/// Initial state: every maximal clique of `g`, with cliques larger than
/// `max_edge_size` replaced by a greedy cover of their pairs using subsets of
/// exactly `max_edge_size` vertices.
pub fn initialize(g: &PairwiseGraph, max_edge_size: usize) -> Result<Hypergraph> {
    initialize_with_cap(g, max_edge_size, DEFAULT_CLIQUE_CAP)
}

pub fn initialize_with_cap(g: &PairwiseGraph, max_edge_size: usize, cap: usize) -> Result<Hypergraph> {
    let cliques = maximal_cliques_capped(g, cap)?;
    Ok(initial_state(g.num_vertices(), &cliques, max_edge_size))
}

fn initial_state(num_vertices: usize, cliques: &[Hyperedge], max_edge_size: usize) -> Hypergraph {
    let mut h = Hypergraph::new(num_vertices);
    for c in cliques {
        if c.len() <= max_edge_size {
            h.add_edge(c.clone(), 1).expect("clique vertices are in range");
        } else {
            for piece in greedy_pair_cover(c, max_edge_size) {
                h.add_edge(piece, 1).expect("clique vertices are in range");
            }
        }
    }
    h
}

/// Covers every pair of `clique` with `size`-subsets. Each subset is seeded
/// with the smallest uncovered pair and grown by the vertex covering the most
/// uncovered pairs (lowest id on ties).
fn greedy_pair_cover(clique: &Hyperedge, size: usize) -> Vec<Hyperedge> {
    let vs = clique.vertices();
    let mut uncovered: BTreeSet<Pair> = clique.pairs().collect();
    let mut out = Vec::new();
    while let Some(&(a, b)) = uncovered.first() {
        let mut piece = vec![a, b];
        while piece.len() < size {
            let best = vs
                .iter()
                .copied()
                .filter(|w| !piece.contains(w))
                .max_by_key(|&w| {
                    let gain = piece.iter().filter(|&&s| uncovered.contains(&pair(s, w))).count();
                    (gain, std::cmp::Reverse(w))
                })
                .expect("clique is larger than piece");
            piece.push(best);
        }
        piece.sort_unstable();
        let piece = Hyperedge::from_sorted_unchecked(piece);
        for p in piece.pairs() {
            uncovered.remove(&p);
        }
        out.push(piece);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    pub alpha: f64,
    pub entropy: f64,
    pub accepted: bool,
    pub num_hyperedges: u64,
    pub log_posterior: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerTrace {
    pub records: Vec<TraceRecord>,
    pub initial: Hypergraph,
    pub initial_log_posterior: f64,
    pub final_state: Hypergraph,
    pub map: Hypergraph,
    pub map_log_posterior: f64,
    /// Iteration at which the MAP state was first visited (0 = initial state).
    pub map_iteration: u64,
    pub iterations: u64,
    pub burn_in: u64,
    pub accepted_moves: u64,
    pub null_moves: u64,
    pub projection_rejections: u64,
    pub projection_violations: u64,
}

impl SamplerTrace {
    /// MAP estimate: the visited state with the highest log-posterior,
    /// earliest on ties. Burn-in states are included.
    pub fn map_estimate(&self) -> &Hypergraph {
        &self.map
    }

    /// Trace as CSV with a fixed header; `stride` keeps every n-th record.
    pub fn to_csv(&self, stride: u64) -> String {
        let mut out = String::from("t,alpha,entropy,accepted,num_hyperedges,log_posterior\n");
        for r in self.records.iter().filter(|r| r.t % stride.max(1) == 0) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.t, r.alpha, r.entropy, r.accepted as u8, r.num_hyperedges, r.log_posterior
            );
        }
        out
    }
}

/// Wall-clock sample taken alongside recorded iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub t: u64,
    pub elapsed_ns: u64,
    pub num_hyperedges: u64,
}

const PRESENT_TABLE: u64 = 64;

/// Dense ids for the edges of the observed graph: row `i` lists the
/// neighbours `j > i` in sorted order.
#[derive(Clone, Debug)]
struct PairIndex {
    offsets: Vec<usize>,
    upper: Vec<VertexId>,
}

impl PairIndex {
    fn new(g: &PairwiseGraph) -> Self {
        let mut offsets = Vec::with_capacity(g.num_vertices() + 1);
        let mut upper = Vec::with_capacity(g.num_edges());
        offsets.push(0);
        for i in 0..g.num_vertices() as VertexId {
            upper.extend(g.neighbors(i).filter(|&j| j > i));
            offsets.push(upper.len());
        }
        PairIndex { offsets, upper }
    }

    fn index(&self, (i, j): Pair) -> usize {
        let (lo, hi) = (self.offsets[i as usize], self.offsets[i as usize + 1]);
        lo + self.upper[lo..hi]
            .binary_search(&j)
            .expect("sub-hyperedge pairs are edges of the observed graph")
    }
}

#[derive(Clone, Debug)]
struct Slot {
    multiplicity: u32,
    holders: Vec<u32>,
}

/// Outcome of one [`Chain::step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub alpha: f64,
    pub accepted: bool,
    pub null_move: bool,
    pub projection_rejected: bool,
}

/// Incrementally maintained chain state. Each step touches only the pairs of
/// the proposed sub-hyperedge and the candidates containing it.
pub struct Chain<'g> {
    graph: &'g PairwiseGraph,
    kernel: ProposalKernel,
    params: ModelParams,
    log_miss: f64,
    enforce_projection: bool,
    edges: IndexMap<Hyperedge, Slot>,
    present: Vec<IndexSet<Hyperedge>>,
    pairs: PairIndex,
    cover: Vec<u64>,
    covered: usize,
    present_table: Vec<f64>,
    total: u64,
    log_posterior: f64,
    rng: ChaCha8Rng,
    t: u64,
}

impl<'g> Chain<'g> {
    pub fn new(graph: &'g PairwiseGraph, config: &SamplerConfig) -> Result<Self> {
        config.validate()?;
        let kernel = ProposalKernel::new(graph, config.params.max_edge_size, config.clique_cap)?;
        let initial = initial_state(graph.num_vertices(), kernel.candidates(), config.params.max_edge_size);
        let lp = log_posterior(graph, &initial, &config.params)?;
        debug_assert!(!lp.is_zero(), "initial state must be feasible");

        let mut chain = Chain {
            graph,
            present: vec![IndexSet::new(); kernel.candidates.len()],
            kernel,
            params: config.params.clone(),
            log_miss: config.params.log_miss(),
            enforce_projection: config.enforce_projection,
            edges: IndexMap::new(),
            pairs: PairIndex::new(graph),
            cover: vec![0; graph.num_edges()],
            covered: 0,
            present_table: (0..PRESENT_TABLE)
                .map(|c| log_pair_present(c, config.params.log_miss()))
                .collect(),
            total: 0,
            log_posterior: lp.value(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            t: 0,
        };
        for (e, m) in initial.iter() {
            for _ in 0..m {
                chain.insert(e);
            }
        }
        Ok(chain)
    }

    pub fn iteration(&self) -> u64 {
        self.t
    }

    pub fn log_posterior(&self) -> f64 {
        self.log_posterior
    }

    pub fn num_hyperedges(&self) -> u64 {
        self.total
    }

    pub fn kernel(&self) -> &ProposalKernel {
        &self.kernel
    }

    /// Materializes the current state.
    pub fn state(&self) -> Hypergraph {
        let mut h = Hypergraph::new(self.graph.num_vertices());
        for (e, slot) in &self.edges {
            h.add_edge(e.clone(), slot.multiplicity)
                .expect("state edges are in range");
        }
        h
    }

    /// `project(state) == observed graph`, checked from scratch.
    pub fn projection_matches(&self) -> bool {
        self.state().project() == *self.graph
    }

    fn insert(&mut self, sub: &Hyperedge) {
        match self.edges.get_mut(sub) {
            Some(slot) => slot.multiplicity += 1,
            None => {
                let holders = self.kernel.containing(sub);
                for &k in &holders {
                    self.present[k as usize].insert(sub.clone());
                }
                self.edges.insert(
                    sub.clone(),
                    Slot {
                        multiplicity: 1,
                        holders,
                    },
                );
            }
        }
        for p in sub.pairs() {
            let c = &mut self.cover[self.pairs.index(p)];
            *c += 1;
            if *c == 1 {
                self.covered += 1;
            }
        }
        self.total += 1;
    }

    fn remove(&mut self, sub: &Hyperedge) {
        let slot = self.edges.get_mut(sub).expect("removed edge is present");
        slot.multiplicity -= 1;
        if slot.multiplicity == 0 {
            let slot = self.edges.swap_remove(sub).expect("present");
            for &k in &slot.holders {
                self.present[k as usize].swap_remove(sub);
            }
        }
        for p in sub.pairs() {
            let c = &mut self.cover[self.pairs.index(p)];
            *c -= 1;
            if *c == 0 {
                self.covered -= 1;
            }
        }
        self.total -= 1;
    }

    fn log_present(&self, count: u64) -> f64 {
        match self.present_table.get(count as usize) {
            Some(&v) => v,
            None => log_pair_present(count, self.log_miss),
        }
    }

    fn multiplicity(&self, sub: &Hyperedge) -> u32 {
        self.edges.get(sub).map_or(0, |s| s.multiplicity)
    }

    /// Runs one iteration and returns what happened. The accepted move, if
    /// any, is reported through `journal`.
    fn step_inner(&mut self, journal: Option<&mut Vec<(MoveKind, Hyperedge)>>) -> StepOutcome {
        self.t += 1;
        let null = StepOutcome {
            alpha: 1.0,
            accepted: true,
            null_move: true,
            projection_rejected: false,
        };
        let m = self.kernel.candidates.len();
        if m == 0 {
            return null;
        }
        let target = self.rng.random_range(0..m);
        let kind = if self.rng.random_bool(0.5) {
            MoveKind::AddSub
        } else {
            MoveKind::RemoveSub
        };

        let (sub, holders) = match kind {
            MoveKind::AddSub => {
                let sub = self.kernel.draw_sub(target, &mut self.rng);
                let holders = match self.edges.get(&sub) {
                    Some(slot) => slot.holders.clone(),
                    None => self.kernel.containing(&sub),
                };
                (sub, holders)
            }
            MoveKind::RemoveSub => {
                let present = &self.present[target];
                if present.is_empty() {
                    return null;
                }
                let sub = present[self.rng.random_range(0..present.len())].clone();
                let holders = self.edges[&sub].holders.clone();
                (sub, holders)
            }
        };

        let current = self.multiplicity(&sub);
        let add_total: f64 = holders
            .iter()
            .map(|&k| self.kernel.add_weight(k as usize, sub.len()))
            .sum();
        let mut projection_ok = true;
        let (delta, log_q) = match kind {
            MoveKind::AddSub => {
                let fresh = (current == 0) as usize;
                let remove_total: f64 = holders
                    .iter()
                    .map(|&k| 1.0 / (self.present[k as usize].len() + fresh) as f64)
                    .sum();
                let mut delta = -self.params.beta - if current >= 1 { self.params.gamma } else { 0.0 };
                for p in sub.pairs() {
                    let c = self.cover[self.pairs.index(p)];
                    delta += self.log_present(c + 1) - self.log_present(c);
                }
                (delta, remove_total.ln() - add_total.ln())
            }
            MoveKind::RemoveSub => {
                let remove_total: f64 = holders
                    .iter()
                    .map(|&k| 1.0 / self.present[k as usize].len() as f64)
                    .sum();
                let mut delta = self.params.beta + if current >= 2 { self.params.gamma } else { 0.0 };
                for p in sub.pairs() {
                    let c = self.cover[self.pairs.index(p)];
                    if c == 1 {
                        projection_ok = false;
                        delta = f64::NEG_INFINITY;
                        break;
                    }
                    delta += self.log_present(c - 1) - self.log_present(c);
                }
                (delta, add_total.ln() - remove_total.ln())
            }
        };

        let alpha = alpha_from_log_ratio(delta + log_q);
        let u: f64 = self.rng.random();
        let passes = projection_ok || !self.enforce_projection;
        let accepted = u < alpha && passes;
        if accepted {
            match kind {
                MoveKind::AddSub => self.insert(&sub),
                MoveKind::RemoveSub => self.remove(&sub),
            }
            self.log_posterior += delta;
            debug_assert_eq!(self.covered, self.graph.num_edges());
            if let Some(j) = journal {
                j.push((kind, sub));
            }
        }
        StepOutcome {
            alpha,
            accepted,
            null_move: false,
            projection_rejected: u < alpha && !passes,
        }
    }

    pub fn step(&mut self) -> StepOutcome {
        self.step_inner(None)
    }
}

/// Runs the sampler for `config.iterations` steps.
pub fn run(g: &PairwiseGraph, config: &SamplerConfig) -> Result<SamplerTrace> {
    run_inner(g, config, None)
}

/// Like [`run`], also sampling wall-clock time at each recorded iteration.
pub fn run_timed(g: &PairwiseGraph, config: &SamplerConfig) -> Result<(SamplerTrace, Vec<TimePoint>)> {
    let mut times = Vec::new();
    let trace = run_inner(g, config, Some(&mut times))?;
    Ok((trace, times))
}

fn run_inner(
    g: &PairwiseGraph,
    config: &SamplerConfig,
    mut times: Option<&mut Vec<TimePoint>>,
) -> Result<SamplerTrace> {
    let mut chain = Chain::new(g, config)?;
    let initial = chain.state();
    let initial_lp = chain.log_posterior();
    let start = Instant::now();

    let mut journal = Vec::new();
    let mut best = (initial_lp, 0u64, 0usize);
    let mut records = Vec::new();
    let (mut accepted_moves, mut null_moves, mut projection_rejections, mut projection_violations) = (0, 0, 0, 0);

    for _ in 0..config.iterations {
        let out = chain.step_inner(Some(&mut journal));
        let t = chain.iteration();
        if out.null_move {
            null_moves += 1;
        } else if out.accepted {
            accepted_moves += 1;
            if config.verify_projection && !chain.projection_matches() {
                projection_violations += 1;
            }
            if chain.log_posterior() > best.0 + MAP_TOLERANCE {
                best = (chain.log_posterior(), t, journal.len());
            }
        }
        if out.projection_rejected {
            projection_rejections += 1;
        }
        if t % config.trace_stride == 0 {
            if config.record_trace {
                records.push(TraceRecord {
                    t,
                    alpha: out.alpha,
                    entropy: binary_entropy(out.alpha),
                    accepted: out.accepted,
                    num_hyperedges: chain.num_hyperedges(),
                    log_posterior: chain.log_posterior(),
                });
            }
            if let Some(times) = times.as_deref_mut() {
                times.push(TimePoint {
                    t,
                    elapsed_ns: start.elapsed().as_nanos() as u64,
                    num_hyperedges: chain.num_hyperedges(),
                });
            }
        }
    }

    let mut map = initial.clone();
    for (kind, sub) in &journal[..best.2] {
        match kind {
            MoveKind::AddSub => map.add_edge(sub.clone(), 1)?,
            MoveKind::RemoveSub => {
                map.remove_one(sub);
            }
        }
    }
    let map_log_posterior = log_posterior(g, &map, &config.params)?.value();

    Ok(SamplerTrace {
        records,
        initial,
        initial_log_posterior: initial_lp,
        final_state: chain.state(),
        map,
        map_log_posterior,
        map_iteration: best.1,
        iterations: config.iterations,
        burn_in: config.burn_in,
        accepted_moves,
        null_moves,
        projection_rejections,
        projection_violations,
    })
}

/// Runs independent chains with the given seeds on separate threads and
/// returns the trace with the best MAP (lowest seed index on ties).
pub fn run_chains(g: &PairwiseGraph, config: &SamplerConfig, seeds: &[u64]) -> Result<SamplerTrace> {
    let traces: Vec<Result<SamplerTrace>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let cfg = SamplerConfig { seed, ..config.clone() };
                scope.spawn(move || run(g, &cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    });
    let mut best: Option<SamplerTrace> = None;
    for trace in traces {
        let trace = trace?;
        if best
            .as_ref()
            .is_none_or(|b| trace.map_log_posterior > b.map_log_posterior + MAP_TOLERANCE)
        {
            best = Some(trace);
        }
    }
    best.ok_or_else(|| Error::InvalidParams("at least one seed is required".into()))
}
