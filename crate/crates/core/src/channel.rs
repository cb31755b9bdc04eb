//! Binary antipodal transmission of a pairwise graph over an AWGN channel.
//!
//! The graph is framed densely: one symbol per unordered pair `(i, j)`,
//! `i < j`, in row-major order, `+1` for an edge and `-1` otherwise. Noise can
//! therefore both delete and insert edges. SNR is per symbol with unit symbol
//! energy, `snr_db = 10 log10(1 / sigma^2)`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{PairwiseGraph, VertexId};

pub const DEFAULT_FRAME_VERTEX_CAP: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Snr {
    Noiseless,
    Db(f64),
}

impl Snr {
    /// Noise standard deviation `10^(-snr_db / 20)`; zero when noiseless.
    pub fn sigma(self) -> f64 {
        match self {
            Snr::Noiseless => 0.0,
            Snr::Db(db) => 10f64.powf(-db / 20.0),
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Noiseless => write!(f, "inf"),
            Snr::Db(db) => write!(f, "{db}"),
        }
    }
}

impl FromStr for Snr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "noiseless" | "none" => Ok(Snr::Noiseless),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Snr::Db)
                .ok_or_else(|| Error::InvalidParams(format!("invalid SNR '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub snr: Snr,
    pub seed: u64,
}

/// Dense upper-triangular symbol frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolFrame {
    num_vertices: usize,
    pub symbols: Vec<f64>,
}

impl SymbolFrame {
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Pair carried by symbol `k`.
    pub fn pair_at(&self, k: usize) -> (VertexId, VertexId) {
        let n = self.num_vertices;
        // row i starts at i*n - i(i+1)/2
        let mut i = 0;
        let mut start = 0;
        while start + (n - i - 1) <= k {
            start += n - i - 1;
            i += 1;
        }
        (i as VertexId, (i + 1 + k - start) as VertexId)
    }

    /// Symbol index of pair `(i, j)`, `i < j`.
    pub fn index_of(&self, i: VertexId, j: VertexId) -> usize {
        let (i, j, n) = (i as usize, j as usize, self.num_vertices);
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }
}

pub fn modulate(g: &PairwiseGraph) -> Result<SymbolFrame> {
    modulate_capped(g, DEFAULT_FRAME_VERTEX_CAP)
}

pub fn modulate_capped(g: &PairwiseGraph, cap: usize) -> Result<SymbolFrame> {
    let n = g.num_vertices();
    if n > cap {
        return Err(Error::FrameTooLarge { num_vertices: n, cap });
    }
    let mut symbols = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n as VertexId {
        for j in (i + 1)..n as VertexId {
            symbols.push(if g.has_edge(i, j) { 1.0 } else { -1.0 });
        }
    }
    Ok(SymbolFrame {
        num_vertices: n,
        symbols,
    })
}

/// Adds i.i.d. Gaussian noise with `sigma = 10^(-snr_db/20)`, seeded by
/// `cfg.seed` (ChaCha8).
pub fn transmit(frame: &SymbolFrame, cfg: &ChannelConfig) -> SymbolFrame {
    let sigma = cfg.snr.sigma();
    if sigma == 0.0 {
        return frame.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let symbols = frame
        .symbols
        .iter()
        .map(|&s| {
            let z: f64 = StandardNormal.sample(&mut rng);
            s + sigma * z
        })
        .collect();
    SymbolFrame {
        num_vertices: frame.num_vertices,
        symbols,
    }
}

/// Threshold decoding: a pair is present iff its symbol is positive.
pub fn demodulate(frame: &SymbolFrame) -> PairwiseGraph {
    let n = frame.num_vertices;
    let mut g = PairwiseGraph::new(n);
    let mut k = 0;
    for i in 0..n as VertexId {
        for j in (i + 1)..n as VertexId {
            if frame.symbols[k] > 0.0 {
                g.add_edge(i, j).expect("pair in range");
            }
            k += 1;
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub symbols: usize,
    pub flips: usize,
    pub inserted_edges: usize,
    pub deleted_edges: usize,
    pub flip_rate: f64,
}

/// `demodulate(transmit(modulate(g)))` plus error counts.
pub fn run_channel(g: &PairwiseGraph, cfg: &ChannelConfig) -> Result<(PairwiseGraph, ChannelStats)> {
    let clean = modulate(g)?;
    let noisy = transmit(&clean, cfg);
    let received = demodulate(&noisy);
    let (mut inserted, mut deleted) = (0, 0);
    for (a, b) in clean.symbols.iter().zip(&noisy.symbols) {
        match (*a > 0.0, *b > 0.0) {
            (false, true) => inserted += 1,
            (true, false) => deleted += 1,
            _ => {}
        }
    }
    let symbols = clean.symbols.len();
    let flips = inserted + deleted;
    Ok((
        received,
        ChannelStats {
            symbols,
            flips,
            inserted_edges: inserted,
            deleted_edges: deleted,
            flip_rate: if symbols == 0 {
                0.0
            } else {
                flips as f64 / symbols as f64
            },
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k3() -> PairwiseGraph {
        PairwiseGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn modulate_layout() {
        assert_eq!(modulate(&k3()).unwrap().symbols, vec![1.0, 1.0, 1.0]);
        assert_eq!(modulate(&PairwiseGraph::new(3)).unwrap().symbols, vec![-1.0; 3]);
        let path = PairwiseGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(modulate(&path).unwrap().symbols, vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            modulate_capped(&PairwiseGraph::new(10), 9),
            Err(Error::FrameTooLarge { .. })
        ));
    }

    #[test]
    fn pair_layout_is_consistent() {
        let frame = modulate(&PairwiseGraph::new(7)).unwrap();
        let mut k = 0;
        for i in 0..7 {
            for j in (i + 1)..7 {
                assert_eq!(frame.pair_at(k), (i, j));
                assert_eq!(frame.index_of(i, j), k);
                k += 1;
            }
        }
    }

    #[test]
    fn threshold_at_zero() {
        let frame = SymbolFrame {
            num_vertices: 3,
            symbols: vec![0.2, -3.1, 1e-300],
        };
        let g = demodulate(&frame);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn noiseless_is_identity_and_seeded_noise_repeats() {
        let frame = modulate(&k3()).unwrap();
        let quiet = ChannelConfig {
            snr: Snr::Noiseless,
            seed: 1,
        };
        assert_eq!(transmit(&frame, &quiet), frame);
        let loud = ChannelConfig {
            snr: Snr::Db(0.0),
            seed: 42,
        };
        assert_eq!(transmit(&frame, &loud), transmit(&frame, &loud));
        assert_ne!(transmit(&frame, &loud), frame);
    }

    #[test]
    fn high_snr_flips_nothing() {
        // flip probability Phi(-10^(30/20)) = Phi(-31.6) is ~1e-219
        let g = PairwiseGraph::new(142); // 10011 symbols
        let (out, stats) = run_channel(
            &g,
            &ChannelConfig {
                snr: Snr::Db(30.0),
                seed: 3,
            },
        )
        .unwrap();
        assert!(stats.symbols >= 10_000);
        assert_eq!(stats.flips, 0);
        assert_eq!(out, g);
    }

    #[test]
    fn snr_parsing() {
        assert_eq!("inf".parse::<Snr>().unwrap(), Snr::Noiseless);
        assert_eq!("-10".parse::<Snr>().unwrap(), Snr::Db(-10.0));
        assert!("abc".parse::<Snr>().is_err());
        assert!((Snr::Db(20.0).sigma() - 0.1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn clean_round_trip(n in 1usize..20, bits in proptest::collection::vec(any::<bool>(), 190)) {
            let mut g = PairwiseGraph::new(n);
            let mut k = 0;
            for i in 0..n as VertexId {
                for j in (i + 1)..n as VertexId {
                    if bits[k] { g.add_edge(i, j).unwrap(); }
                    k += 1;
                }
            }
            prop_assert_eq!(demodulate(&modulate(&g).unwrap()), g.clone());
            let (out, stats) = run_channel(&g, &ChannelConfig { snr: Snr::Noiseless, seed: 0 }).unwrap();
            prop_assert_eq!(out, g);
            prop_assert_eq!(stats.flips, 0);
        }
    }
}
