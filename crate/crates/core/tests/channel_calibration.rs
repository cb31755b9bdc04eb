use hyperbayes::channel::{run_channel, ChannelConfig, Snr};
use hyperbayes::PairwiseGraph;
use statrs::distribution::{ContinuousCDF, Normal};

// 1416 vertices give 1_001_820 symbols
const N: usize = 1416;

fn flip_probability(snr_db: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(-(10f64.powf(snr_db / 20.0)))
}

#[test]
fn flip_rate_follows_gaussian_tail() {
    let g = PairwiseGraph::new(N);
    for (k, snr_db) in [-10.0, -3.0, 0.0, 3.0, 6.0].into_iter().enumerate() {
        let (_, stats) = run_channel(
            &g,
            &ChannelConfig {
                snr: Snr::Db(snr_db),
                seed: 100 + k as u64,
            },
        )
        .unwrap();
        let p = flip_probability(snr_db);
        let sd = (p * (1.0 - p) / stats.symbols as f64).sqrt();
        assert!(
            (stats.flip_rate - p).abs() < 5.0 * sd,
            "snr {snr_db}: rate {} vs {p}",
            stats.flip_rate
        );
    }
}

#[test]
fn zero_db_rate() {
    let (_, stats) = run_channel(
        &PairwiseGraph::new(N),
        &ChannelConfig {
            snr: Snr::Db(0.0),
            seed: 9,
        },
    )
    .unwrap();
    assert!(stats.symbols >= 1_000_000);
    assert!((stats.flip_rate - 0.1587).abs() <= 0.002, "rate {}", stats.flip_rate);
}

#[test]
fn insertions_and_deletions_are_symmetric() {
    // half the pairs present: both error kinds occur at the same rate
    let mut g = PairwiseGraph::new(600);
    for i in 0..600u32 {
        for j in (i + 1)..600 {
            if (i + j) % 2 == 0 {
                g.add_edge(i, j).unwrap();
            }
        }
    }
    let (_, s) = run_channel(
        &g,
        &ChannelConfig {
            snr: Snr::Db(0.0),
            seed: 4,
        },
    )
    .unwrap();
    let ratio = s.inserted_edges as f64 / s.deleted_edges as f64;
    assert!((ratio - 1.0).abs() < 0.03, "ratio {ratio}");
}
