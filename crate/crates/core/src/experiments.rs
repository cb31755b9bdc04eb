//! End-to-end experiment drivers shared by the command-line tool and the
//! acceptance suite: planted instances, SNR and edge-size sweeps, the oracle
//! cross-check and the scaling benchmark.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{run_channel, ChannelConfig, Snr};
use crate::error::{Error, Result};
use crate::format::write_pairwise;
use crate::hypergraph::{Hyperedge, Hypergraph, PairwiseGraph, VertexId};
use crate::metrics::{compression_rate, entropy_histogram, recovery_score, EntropyHistogram, RecoveryScore};
use crate::model::ModelParams;
use crate::oracle::{exact_map, exact_posterior_table, EnumerationBounds};
use crate::sampler::{run, Chain, SamplerConfig, SamplerTrace};

/// Applies `f` to every item on up to `threads` workers; results keep input
/// order.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= items.len() {
                    break;
                }
                let r = f(&items[k]);
                slots.lock().expect("no poisoned workers")[k] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect()
}

pub const PLANT_POOL: usize = 256;

/// Random hypergraph with `num_edges` hyperedges of sizes uniform in
/// `min_size..=max_size`, placed to keep edges apart: each vertex is chosen
/// to avoid pairs that are already covered and to avoid sharing a projected
/// neighbour with vertices already in the edge, preferring low degree. The
/// constraints are relaxed only when no vertex satisfies them. Large vertex
/// sets are searched through a random pool of `PLANT_POOL` vertices per edge.
pub fn planted_hypergraph(
    num_vertices: usize,
    num_edges: usize,
    min_size: usize,
    max_size: usize,
    seed: u64,
) -> Result<Hypergraph> {
    if min_size < 2 || max_size < min_size || max_size > num_vertices {
        return Err(Error::InvalidParams(format!(
            "edge sizes {min_size}..={max_size} invalid for {num_vertices} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<BTreeSet<VertexId>> = vec![BTreeSet::new(); num_vertices];
    let mut membership = vec![0usize; num_vertices];
    let mut h = Hypergraph::new(num_vertices);
    let mut order: Vec<VertexId> = (0..num_vertices as VertexId).collect();

    for _ in 0..num_edges {
        let size = rng.random_range(min_size..=max_size);
        let mut chosen: Vec<VertexId> = Vec::with_capacity(size);
        let pool: &[VertexId] = if num_vertices <= PLANT_POOL {
            order.shuffle(&mut rng);
            &order
        } else {
            order.partial_shuffle(&mut rng, PLANT_POOL).0
        };
        while chosen.len() < size {
            let best = pool
                .iter()
                .copied()
                .filter(|v| !chosen.contains(v))
                .min_by_key(|&w| {
                    let covered = chosen.iter().filter(|&&c| adj[c as usize].contains(&w)).count();
                    let shared = chosen
                        .iter()
                        .filter(|&&c| adj[c as usize].intersection(&adj[w as usize]).next().is_some())
                        .count();
                    (covered, shared, membership[w as usize])
                })
                .expect("enough vertices");
            chosen.push(best);
        }
        for (a, &x) in chosen.iter().enumerate() {
            membership[x as usize] += 1;
            for &y in &chosen[a + 1..] {
                adj[x as usize].insert(y);
                adj[y as usize].insert(x);
            }
        }
        h.add_edge(Hyperedge::new(chosen)?, 1)?;
    }
    Ok(h)
}

/// Erdős-Rényi graph conditioned on being connected (rejection sampling).
pub fn random_connected_graph(num_vertices: usize, edge_prob: f64, rng: &mut impl Rng) -> PairwiseGraph {
    loop {
        let mut g = PairwiseGraph::new(num_vertices);
        for i in 0..num_vertices as VertexId {
            for j in (i + 1)..num_vertices as VertexId {
                if rng.random_bool(edge_prob) {
                    g.add_edge(i, j).expect("valid pair");
                }
            }
        }
        if is_connected(&g) {
            return g;
        }
    }
}

fn is_connected(g: &PairwiseGraph) -> bool {
    let n = g.num_vertices();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0 as VertexId];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in g.neighbors(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Reconstruction of a known hypergraph from a channel-corrupted projection.
#[derive(Clone, Debug)]
pub struct ReconstructionRun {
    pub observed: PairwiseGraph,
    pub flip_rate: f64,
    pub trace: SamplerTrace,
    pub score: RecoveryScore,
}

/// project -> channel -> sample -> score.
pub fn reconstruct_through_channel(
    truth: &Hypergraph,
    channel: &ChannelConfig,
    sampler: &SamplerConfig,
) -> Result<ReconstructionRun> {
    let (observed, stats) = run_channel(&truth.project(), channel)?;
    let trace = run(&observed, sampler)?;
    let score = recovery_score(truth, &trace.map);
    Ok(ReconstructionRun {
        observed,
        flip_rate: stats.flip_rate,
        trace,
        score,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrRow {
    pub snr: Snr,
    pub seed: u64,
    pub f1: f64,
    pub jaccard: f64,
    pub edge_flip_rate: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrSweep {
    pub rows: Vec<SnrRow>,
    /// Acceptance-entropy histogram per SNR point, pooled over seeds.
    pub entropy: Vec<(Snr, EntropyHistogram)>,
    /// size -> recovered hyperedge count (distinct) pooled per SNR point
    pub recovered_sizes: Vec<(Snr, std::collections::BTreeMap<usize, u64>)>,
}

impl SnrSweep {
    /// Mean F1 per SNR point, in sweep order.
    pub fn mean_f1(&self) -> Vec<(Snr, f64)> {
        let mut out: Vec<(Snr, f64, usize)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(s, _, _)| *s == r.snr) {
                Some(slot) => {
                    slot.1 += r.f1;
                    slot.2 += 1;
                }
                None => out.push((r.snr, r.f1, 1)),
            }
        }
        out.into_iter().map(|(s, t, n)| (s, t / n as f64)).collect()
    }
}

/// For each SNR and each seed index `k`, transmits with channel seed
/// `channel_seed + k` and samples with seed `sampler.seed + k`.
pub fn sweep_snr(
    truth: &Hypergraph,
    snrs: &[Snr],
    num_seeds: u64,
    channel_seed: u64,
    sampler: &SamplerConfig,
    threads: usize,
) -> Result<SnrSweep> {
    let jobs: Vec<(usize, u64)> = (0..snrs.len())
        .flat_map(|s| (0..num_seeds).map(move |k| (s, k)))
        .collect();
    let results = parallel_map(&jobs, threads, |&(s, k)| {
        let channel = ChannelConfig {
            snr: snrs[s],
            seed: channel_seed.wrapping_add(k),
        };
        let cfg = SamplerConfig {
            seed: sampler.seed.wrapping_add(k),
            ..sampler.clone()
        };
        reconstruct_through_channel(truth, &channel, &cfg).map(|run| {
            let entropies: Vec<f64> = run.trace.records.iter().map(|r| r.entropy).collect();
            let sizes = crate::metrics::size_histogram(&run.trace.map).distinct;
            (
                SnrRow {
                    snr: snrs[s],
                    seed: channel.seed,
                    f1: run.score.f1,
                    jaccard: run.score.jaccard_mean,
                    edge_flip_rate: run.flip_rate,
                    precision: run.score.precision,
                    recall: run.score.recall,
                },
                entropies,
                sizes,
            )
        })
    });

    let mut rows = Vec::with_capacity(jobs.len());
    let mut pooled: Vec<Vec<f64>> = vec![Vec::new(); snrs.len()];
    let mut sizes: Vec<std::collections::BTreeMap<usize, u64>> = vec![Default::default(); snrs.len()];
    for (&(s, _), res) in jobs.iter().zip(results) {
        let (row, entropies, hist) = res?;
        rows.push(row);
        pooled[s].extend(entropies);
        for (k, v) in hist {
            *sizes[s].entry(k).or_insert(0) += v;
        }
    }
    Ok(SnrSweep {
        rows,
        entropy: snrs
            .iter()
            .zip(pooled)
            .map(|(&s, v)| (s, entropy_histogram(v)))
            .collect(),
        recovered_sizes: snrs.iter().copied().zip(sizes).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthRow {
    pub max_edge_size: usize,
    pub compression_rate: f64,
    pub f1: f64,
}

/// Compression rate and noiseless recovery F1 for each edge-size limit.
pub fn sweep_length(
    truth: &Hypergraph,
    limits: &[usize],
    sampler: &SamplerConfig,
    threads: usize,
) -> Result<Vec<LengthRow>> {
    let observed = truth.project();
    parallel_map(limits, threads, |&l| {
        let mut cfg = sampler.clone();
        cfg.params.max_edge_size = l;
        let trace = run(&observed, &cfg)?;
        Ok(LengthRow {
            max_edge_size: l,
            compression_rate: compression_rate(truth, l),
            f1: recovery_score(truth, &trace.map).f1,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckConfig {
    pub instances: usize,
    pub seed: u64,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub edge_prob: f64,
    pub iterations: u64,
    pub params: ModelParams,
    pub bounds: EnumerationBounds,
    pub tolerance: f64,
}

impl OracleCheckConfig {
    pub fn new(instances: usize, seed: u64, params: ModelParams) -> Self {
        OracleCheckConfig {
            instances,
            seed,
            min_vertices: 3,
            max_vertices: 6,
            edge_prob: 0.5,
            iterations: 50_000,
            bounds: EnumerationBounds::new(params.max_edge_size),
            params,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub index: usize,
    pub graph: String,
    pub sampler_log_posterior: f64,
    pub oracle_log_posterior: f64,
    pub sampler_map: String,
    pub oracle_map: String,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckReport {
    pub instances: usize,
    pub matches: usize,
    pub match_rate: f64,
    pub tolerance: f64,
    pub mismatches: Vec<OracleCase>,
}

/// Instance `k` uses a graph drawn from `ChaCha8(seed + k)` and the sampler
/// seed `seed + k`.
pub fn oracle_check(cfg: &OracleCheckConfig, threads: usize) -> Result<(OracleCheckReport, Vec<OracleCase>)> {
    let ids: Vec<usize> = (0..cfg.instances).collect();
    let cases = parallel_map(&ids, threads, |&k| -> Result<OracleCase> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
        let n = rng.random_range(cfg.min_vertices..=cfg.max_vertices);
        let g = random_connected_graph(n, cfg.edge_prob, &mut rng);
        let (oracle_map, oracle_lp) = exact_map(&g, &cfg.params, &cfg.bounds)?;
        let mut sc = SamplerConfig::new(cfg.iterations, cfg.seed.wrapping_add(k as u64), cfg.params.clone());
        sc.record_trace = false;
        let trace = run(&g, &sc)?;
        let matched = (trace.map_log_posterior - oracle_lp).abs() <= cfg.tolerance;
        Ok(OracleCase {
            index: k,
            graph: write_pairwise(&g),
            sampler_log_posterior: trace.map_log_posterior,
            oracle_log_posterior: oracle_lp,
            sampler_map: crate::format::write_hypergraph(&trace.map),
            oracle_map: crate::format::write_hypergraph(&oracle_map),
            matched,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let matches = cases.iter().filter(|c| c.matched).count();
    let report = OracleCheckReport {
        instances: cfg.instances,
        matches,
        match_rate: if cfg.instances == 0 {
            1.0
        } else {
            matches as f64 / cfg.instances as f64
        },
        tolerance: cfg.tolerance,
        mismatches: cases.iter().filter(|c| !c.matched).cloned().collect(),
    };
    Ok((report, cases))
}

/// Total-variation distance between the chain's empirical state frequencies
/// over `iterations` steps after `burn_in` steps, and the exact posterior
/// over the states enumerated within `bounds`. States the chain visits
/// outside the table count fully toward the distance.
pub fn empirical_tv_distance(
    g: &PairwiseGraph,
    params: &ModelParams,
    bounds: &EnumerationBounds,
    burn_in: u64,
    iterations: u64,
    seed: u64,
) -> Result<f64> {
    let table = exact_posterior_table(g, params, bounds)?;
    let cfg = SamplerConfig::new(burn_in + iterations, seed, params.clone());
    let mut chain = Chain::new(g, &cfg)?;
    for _ in 0..burn_in {
        chain.step();
    }
    let mut visits: HashMap<Hypergraph, u64> = HashMap::new();
    let mut current = chain.state();
    for _ in 0..iterations {
        let out = chain.step();
        if out.accepted && !out.null_move {
            current = chain.state();
        }
        *visits.entry(current.clone()).or_insert(0) += 1;
    }
    let exact = table.to_map();
    let mut tv = 0.0;
    for (h, &p) in &exact {
        let q = visits.get(h).copied().unwrap_or(0) as f64 / iterations as f64;
        tv += (p - q).abs();
    }
    for (h, &c) in &visits {
        if !exact.contains_key(h) {
            tv += c as f64 / iterations as f64;
        }
    }
    Ok(tv / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchPoint {
    pub num_vertices: usize,
    pub num_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub num_vertices: usize,
    pub num_edges: usize,
    pub max_edge_size: usize,
    pub iterations: u64,
    pub ns_per_iteration: f64,
    pub total_ms: f64,
}

/// Times the sampling loop (initialization excluded) on planted instances
/// with edge sizes 2..=5, using `iterations[k]` steps for `points[k]`.
/// Repeats run in interleaved rounds over all points, so a slow spell on a
/// shared machine hits every point alike; each point keeps its fastest run.
pub fn bench(
    points: &[BenchPoint],
    iterations: &[u64],
    params: &ModelParams,
    seed: u64,
    repeats: usize,
) -> Result<Vec<BenchRow>> {
    assert_eq!(points.len(), iterations.len());
    let graphs = points
        .iter()
        .map(|p| planted_hypergraph(p.num_vertices, p.num_edges, 2, 5.min(p.num_vertices), seed).map(|h| h.project()))
        .collect::<Result<Vec<_>>>()?;
    let mut best = vec![f64::INFINITY; points.len()];
    for _ in 0..repeats.max(1) {
        for (k, g) in graphs.iter().enumerate() {
            let mut cfg = SamplerConfig::new(iterations[k], seed, params.clone());
            cfg.record_trace = false;
            let mut chain = Chain::new(g, &cfg)?;
            let start = Instant::now();
            for _ in 0..iterations[k] {
                chain.step();
            }
            best[k] = best[k].min(start.elapsed().as_nanos() as f64);
        }
    }
    Ok(points
        .iter()
        .zip(iterations)
        .zip(best)
        .map(|((p, &t), ns)| BenchRow {
            num_vertices: p.num_vertices,
            num_edges: p.num_edges,
            max_edge_size: params.max_edge_size,
            iterations: t,
            ns_per_iteration: ns / t as f64,
            total_ms: ns / 1e6,
        })
        .collect())
}
