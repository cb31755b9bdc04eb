use hyperbayes::experiments::empirical_tv_distance;
use hyperbayes::oracle::EnumerationBounds;
use hyperbayes::{ModelParams, PairwiseGraph};

fn params(p: f64, beta: f64, gamma: f64, l: usize) -> ModelParams {
    ModelParams {
        p,
        beta,
        gamma,
        max_edge_size: l,
        observed_vertices: None,
    }
}

fn bounds(l: usize, max_multiplicity: u32) -> EnumerationBounds {
    EnumerationBounds {
        max_multiplicity,
        ..EnumerationBounds::new(l)
    }
}

#[test]
fn triangle_visits_match_posterior() {
    let g = PairwiseGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
    let tv = empirical_tv_distance(&g, &params(0.8, 0.3, 1.5, 3), &bounds(3, 4), 10_000, 300_000, 11).unwrap();
    assert!(tv < 0.03, "tv = {tv}");
}

#[test]
fn two_triangles_sharing_an_edge() {
    let g = PairwiseGraph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
    let tv = empirical_tv_distance(&g, &params(0.9, 0.5, 2.0, 4), &bounds(4, 4), 10_000, 300_000, 5).unwrap();
    assert!(tv < 0.05, "tv = {tv}");
}

#[test]
fn star_with_pairwise_limit() {
    // only pairs are admissible, so the chain moves over multiplicities alone
    let g = PairwiseGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    let tv = empirical_tv_distance(&g, &params(0.6, 0.2, 0.7, 2), &bounds(2, 6), 10_000, 300_000, 2).unwrap();
    assert!(tv < 0.03, "tv = {tv}");
}
