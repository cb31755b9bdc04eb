//! Evaluation quantities: recovery scores, size histograms, compression rate,
//! acceptance entropy and convergence curves.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::format::{edge_line, write_hypergraph, write_pairwise};
use crate::hypergraph::{Hyperedge, Hypergraph};
use crate::sampler::{SamplerTrace, TimePoint};

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(alpha: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    (term(alpha) + term(1.0 - alpha)).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SizeScore {
    pub precision: f64,
    pub recall: f64,
    pub truth_count: usize,
    pub recovered_count: usize,
    pub matched: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub jaccard_mean: f64,
    pub truth_count: usize,
    pub recovered_count: usize,
    pub matched: usize,
    /// Matched edges whose multiplicities also agree.
    pub multiplicity_matches: usize,
    pub per_size: BTreeMap<usize, SizeScore>,
}

fn ratio(num: usize, den: usize, empty_value: f64) -> f64 {
    if den == 0 {
        empty_value
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn jaccard(a: &Hyperedge, b: &Hyperedge) -> f64 {
    let (x, y) = (a.vertices(), b.vertices());
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter as f64 / (x.len() + y.len() - inter) as f64
}

/// Exact-match precision/recall/F1 over distinct hyperedges plus mean
/// best-match Jaccard over ground-truth edges. Multiplicities are ignored for
/// matching.
///
/// With both sides empty every score is 1; with exactly one side empty the
/// ratios whose denominator is the non-empty side are 0.
pub fn recovery_score(truth: &Hypergraph, recovered: &Hypergraph) -> RecoveryScore {
    let t: BTreeSet<&Hyperedge> = truth.distinct_edges().collect();
    let r: BTreeSet<&Hyperedge> = recovered.distinct_edges().collect();
    let both_empty = t.is_empty() && r.is_empty();
    let empty_value = if both_empty { 1.0 } else { 0.0 };
    let matched = t.intersection(&r).count();
    let precision = ratio(matched, r.len(), empty_value);
    let recall = ratio(matched, t.len(), empty_value);

    // index recovered edges by vertex so best-match only scans overlapping edges
    let mut by_vertex: BTreeMap<u32, Vec<&Hyperedge>> = BTreeMap::new();
    for e in &r {
        for &v in e.vertices() {
            by_vertex.entry(v).or_default().push(e);
        }
    }
    let jaccard_mean = if t.is_empty() {
        empty_value
    } else {
        t.iter()
            .map(|e| {
                e.vertices()
                    .iter()
                    .filter_map(|v| by_vertex.get(v))
                    .flatten()
                    .map(|o| jaccard(e, o))
                    .fold(0.0, f64::max)
            })
            .sum::<f64>()
            / t.len() as f64
    };

    let mut per_size: BTreeMap<usize, SizeScore> = BTreeMap::new();
    for e in &t {
        let s = per_size.entry(e.len()).or_default();
        s.truth_count += 1;
        if r.contains(e) {
            s.matched += 1;
        }
    }
    for e in &r {
        per_size.entry(e.len()).or_default().recovered_count += 1;
    }
    for s in per_size.values_mut() {
        let empty = if s.truth_count == 0 && s.recovered_count == 0 {
            1.0
        } else {
            0.0
        };
        s.precision = ratio(s.matched, s.recovered_count, empty);
        s.recall = ratio(s.matched, s.truth_count, empty);
    }

    let multiplicity_matches = t
        .intersection(&r)
        .filter(|e| truth.multiplicity(e) == recovered.multiplicity(e))
        .count();

    RecoveryScore {
        precision,
        recall,
        f1: f1(precision, recall),
        jaccard_mean,
        truth_count: t.len(),
        recovered_count: r.len(),
        matched,
        multiplicity_matches,
        per_size,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeHistogram {
    /// size -> number of distinct hyperedges
    pub distinct: BTreeMap<usize, u64>,
    /// size -> number of hyperedges counting multiplicity
    pub weighted: BTreeMap<usize, u64>,
}

pub fn size_histogram(h: &Hypergraph) -> SizeHistogram {
    let mut hist = SizeHistogram::default();
    for (e, m) in h.iter() {
        *hist.distinct.entry(e.len()).or_insert(0) += 1;
        *hist.weighted.entry(e.len()).or_insert(0) += m as u64;
    }
    hist
}

/// Bytes of the payload sent under edge-size limit `max_edge_size`: the `.pg`
/// serialization of the full projection plus a verbatim `.hg` line for every
/// hyperedge larger than the limit.
pub fn payload_bytes(h: &Hypergraph, max_edge_size: usize) -> usize {
    let verbatim: usize = h
        .iter()
        .filter(|(e, _)| e.len() > max_edge_size)
        .map(|(e, m)| edge_line(e, m).len())
        .sum();
    write_pairwise(&h.project()).len() + verbatim
}

/// `bytes(.hg of h) / payload_bytes(h, L)`.
pub fn compression_rate(h: &Hypergraph, max_edge_size: usize) -> f64 {
    write_hypergraph(h).len() as f64 / payload_bytes(h, max_edge_size) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: u64,
    pub time_ms: f64,
    pub num_hyperedges: u64,
}

/// Downsamples timing points to at most `max_points` (always keeping the
/// last one).
pub fn convergence_curve(times: &[TimePoint], max_points: usize) -> Vec<CurvePoint> {
    if times.is_empty() || max_points == 0 {
        return Vec::new();
    }
    let step = times.len().div_ceil(max_points).max(1);
    let mut out: Vec<CurvePoint> = times
        .iter()
        .step_by(step)
        .map(|p| CurvePoint {
            t: p.t,
            time_ms: p.elapsed_ns as f64 / 1e6,
            num_hyperedges: p.num_hyperedges,
        })
        .collect();
    let last = times.last().expect("non-empty");
    if out.last().is_some_and(|p| p.t != last.t) {
        out.push(CurvePoint {
            t: last.t,
            time_ms: last.elapsed_ns as f64 / 1e6,
            num_hyperedges: last.num_hyperedges,
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyHistogram {
    /// Lower bin edges; bin `k` covers `[k/50, (k+1)/50)`, the last bin is closed.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

pub const ENTROPY_BINS: usize = 50;

/// Histogram of binary entropies of the recorded acceptance probabilities.
pub fn entropy_distribution(trace: &SamplerTrace) -> EntropyHistogram {
    entropy_histogram(trace.records.iter().map(|r| r.entropy))
}

pub fn entropy_histogram(values: impl IntoIterator<Item = f64>) -> EntropyHistogram {
    let mut counts = vec![0u64; ENTROPY_BINS];
    let mut total = 0;
    for h in values {
        let k = ((h * ENTROPY_BINS as f64) as usize).min(ENTROPY_BINS - 1);
        counts[k] += 1;
        total += 1;
    }
    EntropyHistogram {
        bin_edges: (0..ENTROPY_BINS).map(|k| k as f64 / ENTROPY_BINS as f64).collect(),
        counts,
        total,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut k = 0;
        while k < idx.len() {
            let mut end = k;
            while end + 1 < idx.len() && v[idx[end + 1]] == v[idx[k]] {
                end += 1;
            }
            let avg = (k + end) as f64 / 2.0 + 1.0;
            for &i in &idx[k..=end] {
                r[i] = avg;
            }
            k = end + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}
