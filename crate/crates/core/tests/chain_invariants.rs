use hyperbayes::model::log_posterior;
use hyperbayes::sampler::{run, Chain, SamplerConfig};
use hyperbayes::{ModelParams, PairwiseGraph, VertexId};
use proptest::prelude::*;

fn graph_from_bits(n: usize, bits: &[bool]) -> PairwiseGraph {
    let mut g = PairwiseGraph::new(n);
    let mut k = 0;
    for i in 0..n as VertexId {
        for j in (i + 1)..n as VertexId {
            if bits[k] {
                g.add_edge(i, j).unwrap();
            }
            k += 1;
        }
    }
    g
}

fn arb_graph() -> impl Strategy<Value = PairwiseGraph> {
    (1usize..9).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| graph_from_bits(n, &bits))
    })
}

fn arb_params() -> impl Strategy<Value = ModelParams> {
    (0.5f64..0.999, 0.0f64..3.0, 0.0f64..6.0, 2usize..6).prop_map(|(p, beta, gamma, l)| ModelParams {
        p,
        beta,
        gamma,
        max_edge_size: l,
        observed_vertices: None,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_accepted_state_projects_to_the_observation(g in arb_graph(), params in arb_params(), seed in any::<u64>()) {
        let mut cfg = SamplerConfig::new(2_000, seed, params);
        cfg.verify_projection = true;
        let trace = run(&g, &cfg).unwrap();
        prop_assert_eq!(trace.projection_violations, 0);
        prop_assert_eq!(trace.final_state.project(), g.clone());
        prop_assert_eq!(trace.map.project(), g);
    }

    #[test]
    fn incremental_posterior_tracks_full_recomputation(g in arb_graph(), params in arb_params(), seed in any::<u64>()) {
        let cfg = SamplerConfig::new(500, seed, params.clone());
        let mut chain = Chain::new(&g, &cfg).unwrap();
        for _ in 0..500 {
            chain.step();
            let full = log_posterior(&g, &chain.state(), &params).unwrap().value();
            prop_assert!((chain.log_posterior() - full).abs() < 1e-8, "{} vs {}", chain.log_posterior(), full);
        }
    }

    #[test]
    fn map_dominates_every_recorded_state(g in arb_graph(), params in arb_params(), seed in any::<u64>()) {
        let trace = run(&g, &SamplerConfig::new(1_000, seed, params.clone())).unwrap();
        let best = trace.records.iter().map(|r| r.log_posterior).fold(trace.initial_log_posterior, f64::max);
        prop_assert!((trace.map_log_posterior - best).abs() < 1e-8);
        prop_assert!(trace.map_log_posterior >= trace.initial_log_posterior - 1e-9);
        let recomputed = log_posterior(&g, &trace.map, &params).unwrap().value();
        prop_assert_eq!(recomputed, trace.map_log_posterior);
        prop_assert!(trace.map.max_edge_size() <= params.max_edge_size);
    }

    #[test]
    fn runs_are_reproducible(g in arb_graph(), seed in any::<u64>()) {
        let cfg = SamplerConfig::new(300, seed, ModelParams::default());
        let a = run(&g, &cfg).unwrap();
        let b = run(&g, &cfg).unwrap();
        prop_assert_eq!(a.records, b.records);
        prop_assert_eq!(a.map, b.map);
    }

    #[test]
    fn entropies_are_bits_of_alpha(g in arb_graph(), seed in any::<u64>()) {
        let trace = run(&g, &SamplerConfig::new(300, seed, ModelParams::default())).unwrap();
        for r in &trace.records {
            prop_assert!((0.0..=1.0).contains(&r.alpha));
            prop_assert!((0.0..=1.0).contains(&r.entropy));
            prop_assert!((r.entropy - hyperbayes::metrics::binary_entropy(r.alpha)).abs() < 1e-15);
        }
    }
}
