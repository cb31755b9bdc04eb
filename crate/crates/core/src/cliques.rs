//! Maximal clique enumeration.
//!
//! Bron-Kerbosch with Tomita pivoting, run once per vertex in degeneracy
//! order (Eppstein-Löffler-Strash) so sparse graphs stay cheap.

use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, PairwiseGraph, VertexId};

/// Default abort threshold for [`maximal_cliques`].
pub const DEFAULT_CLIQUE_CAP: usize = 1_000_000;

/// All maximal cliques of size >= 2, sorted lexicographically.
pub fn maximal_cliques(g: &PairwiseGraph) -> Result<Vec<Hyperedge>> {
    maximal_cliques_capped(g, DEFAULT_CLIQUE_CAP)
}

/// Like [`maximal_cliques`] but fails once more than `cap` cliques are found.
pub fn maximal_cliques_capped(g: &PairwiseGraph, cap: usize) -> Result<Vec<Hyperedge>> {
    let n = g.num_vertices();
    let adj: Vec<Vec<VertexId>> = (0..n as VertexId).map(|v| g.neighbors(v).collect()).collect();
    let order = degeneracy_order(&adj);
    let mut position = vec![0usize; n];
    for (k, &v) in order.iter().enumerate() {
        position[v as usize] = k;
    }

    let mut search = Search {
        adj: &adj,
        cap,
        out: Vec::new(),
    };
    let mut r = Vec::new();
    for &v in &order {
        if adj[v as usize].is_empty() {
            continue;
        }
        let (p, x): (Vec<VertexId>, Vec<VertexId>) = adj[v as usize]
            .iter()
            .partition(|&&w| position[w as usize] > position[v as usize]);
        r.push(v);
        search.expand(&mut r, p, x)?;
        r.pop();
    }

    let mut cliques = search.out;
    cliques.sort_unstable();
    Ok(cliques)
}

struct Search<'a> {
    adj: &'a [Vec<VertexId>],
    cap: usize,
    out: Vec<Hyperedge>,
}

impl Search<'_> {
    fn expand(&mut self, r: &mut Vec<VertexId>, mut p: Vec<VertexId>, mut x: Vec<VertexId>) -> Result<()> {
        if p.is_empty() {
            if x.is_empty() && r.len() >= 2 {
                if self.out.len() >= self.cap {
                    return Err(Error::CliqueCapExceeded { cap: self.cap });
                }
                let mut clique = r.clone();
                clique.sort_unstable();
                self.out.push(Hyperedge::from_sorted_unchecked(clique));
            }
            return Ok(());
        }

        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| intersection_len(&p, &self.adj[u as usize]))
            .expect("p is non-empty");
        let pivot_nbrs = &self.adj[pivot as usize];
        let branch: Vec<VertexId> = p
            .iter()
            .copied()
            .filter(|v| pivot_nbrs.binary_search(v).is_err())
            .collect();

        for v in branch {
            let nv = &self.adj[v as usize];
            let p_next = intersect(&p, nv);
            let x_next = intersect(&x, nv);
            r.push(v);
            self.expand(r, p_next, x_next)?;
            r.pop();
            if let Ok(k) = p.binary_search(&v) {
                p.remove(k);
            }
            let k = x.binary_search(&v).unwrap_or_else(|k| k);
            x.insert(k, v);
        }
        Ok(())
    }
}

fn intersect(a: &[VertexId], b: &[VertexId]) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn intersection_len(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Smallest-last vertex ordering via bucket queue.
fn degeneracy_order(adj: &[Vec<VertexId>]) -> Vec<VertexId> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<VertexId>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[degree[v]].push(v as VertexId);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut d = 0;
    while order.len() < n {
        d = d.min(max_deg);
        while buckets[d].is_empty() {
            d += 1;
        }
        let v = buckets[d].pop().expect("bucket non-empty");
        // lazy deletion: stale entries carry an outdated degree
        if removed[v as usize] || degree[v as usize] != d {
            continue;
        }
        removed[v as usize] = true;
        order.push(v);
        for &w in &adj[v as usize] {
            if !removed[w as usize] {
                degree[w as usize] -= 1;
                buckets[degree[w as usize]].push(w);
            }
        }
        d = d.saturating_sub(1);
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cliques(n: usize, edges: &[(VertexId, VertexId)]) -> Vec<Vec<VertexId>> {
        let g = PairwiseGraph::from_edges(n, edges).unwrap();
        maximal_cliques(&g)
            .unwrap()
            .into_iter()
            .map(|c| c.vertices().to_vec())
            .collect()
    }

    /// Exhaustive subset scan: a vertex set is a maximal clique iff it is a
    /// clique and no outside vertex is adjacent to all of it.
    fn brute_force(g: &PairwiseGraph) -> Vec<Vec<VertexId>> {
        let n = g.num_vertices();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let vs: Vec<VertexId> = (0..n as VertexId).filter(|v| mask >> v & 1 == 1).collect();
            if vs.len() < 2 {
                continue;
            }
            let is_clique = vs
                .iter()
                .enumerate()
                .all(|(a, &i)| vs[a + 1..].iter().all(|&j| g.has_edge(i, j)));
            if !is_clique {
                continue;
            }
            let extendable = (0..n as VertexId)
                .filter(|v| mask >> v & 1 == 0)
                .any(|w| vs.iter().all(|&u| g.has_edge(u, w)));
            if !extendable {
                out.push(vs);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn triangle() {
        assert_eq!(cliques(3, &[(0, 1), (0, 2), (1, 2)]), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn path() {
        assert_eq!(cliques(3, &[(0, 1), (1, 2)]), vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn k4_minus_edge() {
        let e = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)];
        assert_eq!(cliques(4, &e), vec![vec![0, 1, 2], vec![1, 2, 3]]);
        let g = PairwiseGraph::from_edges(4, &e).unwrap();
        assert_eq!(cliques(4, &e), brute_force(&g));
    }

    #[test]
    fn isolated_vertices_produce_nothing() {
        assert!(cliques(5, &[]).is_empty());
    }

    #[test]
    fn cap_aborts() {
        let g = PairwiseGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(maximal_cliques_capped(&g, 1), Err(Error::CliqueCapExceeded { cap: 1 }));
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 1usize..9, bits in proptest::collection::vec(any::<bool>(), 36)) {
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
            let found: Vec<Vec<VertexId>> = maximal_cliques(&g)
                .unwrap()
                .into_iter()
                .map(|c| c.vertices().to_vec())
                .collect();
            prop_assert_eq!(&found, &brute_force(&g));
            // every edge lies in some returned clique
            for (i, j) in g.edges() {
                prop_assert!(found.iter().any(|c| c.contains(&i) && c.contains(&j)));
            }
        }
    }
}
