//! Hypergraphs with multiplicities, simple pairwise graphs, and the clique
//! projection linking the two.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense vertex index in `0..num_vertices`.
pub type VertexId = u32;

/// An unordered vertex pair stored as `(low, high)`.
pub type Pair = (VertexId, VertexId);

/// Normalizes `(i, j)` to `(min, max)`.
#[inline]
pub fn pair(i: VertexId, j: VertexId) -> Pair {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// A sorted, duplicate-free set of at least two vertices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<VertexId>", into = "Vec<VertexId>")]
pub struct Hyperedge(Vec<VertexId>);

impl Hyperedge {
    /// Builds a hyperedge from vertices in any order. Duplicates are an error.
    pub fn new(mut vertices: Vec<VertexId>) -> Result<Self> {
        vertices.sort_unstable();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateVertex(w[0]));
        }
        if vertices.len() < 2 {
            return Err(Error::EdgeTooSmall(vertices.len()));
        }
        Ok(Hyperedge(vertices))
    }

    /// Builds a hyperedge from vertices that are already sorted and distinct.
    pub(crate) fn from_sorted_unchecked(vertices: Vec<VertexId>) -> Self {
        debug_assert!(vertices.len() >= 2);
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Hyperedge(vertices)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &Hyperedge) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for v in &self.0 {
            for w in it.by_ref() {
                match w.cmp(v) {
                    std::cmp::Ordering::Less => continue,
                    std::cmp::Ordering::Equal => continue 'outer,
                    std::cmp::Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    /// All `k(k-1)/2` vertex pairs of the edge in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        let vs = &self.0;
        (0..vs.len()).flat_map(move |a| ((a + 1)..vs.len()).map(move |b| (vs[a], vs[b])))
    }

    pub fn max_vertex(&self) -> VertexId {
        *self.0.last().expect("hyperedge has at least two vertices")
    }
}

impl TryFrom<Vec<VertexId>> for Hyperedge {
    type Error = Error;
    fn try_from(v: Vec<VertexId>) -> Result<Self> {
        Hyperedge::new(v)
    }
}

impl From<Hyperedge> for Vec<VertexId> {
    fn from(e: Hyperedge) -> Self {
        e.0
    }
}

impl fmt::Debug for Hyperedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A vertex set plus a multiset of hyperedges, stored as edge -> multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypergraph {
    num_vertices: usize,
    edges: BTreeMap<Hyperedge, u32>,
}

impl Hypergraph {
    pub fn new(num_vertices: usize) -> Self {
        Hypergraph {
            num_vertices,
            edges: BTreeMap::new(),
        }
    }

    /// Convenience constructor from raw vertex lists, each with multiplicity one
    /// per occurrence.
    pub fn from_edges<I, E>(num_vertices: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: Into<Vec<VertexId>>,
    {
        let mut h = Hypergraph::new(num_vertices);
        for e in edges {
            h.add_edge(Hyperedge::new(e.into())?, 1)?;
        }
        Ok(h)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Adds `multiplicity` copies of `edge`.
    pub fn add_edge(&mut self, edge: Hyperedge, multiplicity: u32) -> Result<()> {
        if multiplicity == 0 {
            return Err(Error::ZeroMultiplicity);
        }
        let top = edge.max_vertex();
        if top as usize >= self.num_vertices {
            return Err(Error::VertexOutOfRange {
                vertex: top,
                num_vertices: self.num_vertices,
            });
        }
        *self.edges.entry(edge).or_insert(0) += multiplicity;
        Ok(())
    }

    /// Removes one copy of `edge`. Returns false if the edge was absent.
    pub fn remove_one(&mut self, edge: &Hyperedge) -> bool {
        match self.edges.get_mut(edge) {
            Some(m) if *m > 1 => {
                *m -= 1;
                true
            }
            Some(_) => {
                self.edges.remove(edge);
                true
            }
            None => false,
        }
    }

    pub fn multiplicity(&self, edge: &Hyperedge) -> u32 {
        self.edges.get(edge).copied().unwrap_or(0)
    }

    /// Iterates `(edge, multiplicity)` in lexicographic edge order.
    pub fn iter(&self) -> impl Iterator<Item = (&Hyperedge, u32)> + '_ {
        self.edges.iter().map(|(e, &m)| (e, m))
    }

    pub fn distinct_edges(&self) -> impl Iterator<Item = &Hyperedge> + '_ {
        self.edges.keys()
    }

    pub fn num_distinct(&self) -> usize {
        self.edges.len()
    }

    /// Total hyperedge count `|E|`, i.e. the sum of multiplicities.
    pub fn total_edges(&self) -> u64 {
        self.edges.values().map(|&m| m as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.keys().map(Hyperedge::len).max().unwrap_or(0)
    }

    /// Clique expansion: `(i, j)` is an edge iff some hyperedge contains both.
    pub fn project(&self) -> PairwiseGraph {
        let mut g = PairwiseGraph::new(self.num_vertices);
        for e in self.edges.keys() {
            for (i, j) in e.pairs() {
                g.insert_unchecked(i, j);
            }
        }
        g
    }

    /// `|E_ij|`: the multiplicity-weighted number of hyperedges containing
    /// both `i` and `j`.
    pub fn edge_cover_count(&self, i: VertexId, j: VertexId) -> Result<u64> {
        check_pair(i, j, self.num_vertices)?;
        Ok(self
            .edges
            .iter()
            .filter(|(e, _)| e.contains(i) && e.contains(j))
            .map(|(_, &m)| m as u64)
            .sum())
    }

    /// `|E_ij|` for every pair covered at least once.
    pub fn pair_cover_counts(&self) -> BTreeMap<Pair, u64> {
        let mut counts = BTreeMap::new();
        for (e, &m) in &self.edges {
            for p in e.pairs() {
                *counts.entry(p).or_insert(0) += m as u64;
            }
        }
        counts
    }

    /// Keeps only edges satisfying `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Hyperedge) -> bool) -> Hypergraph {
        Hypergraph {
            num_vertices: self.num_vertices,
            edges: self
                .edges
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, &m)| (e.clone(), m))
                .collect(),
        }
    }
}

pub(crate) fn check_pair(i: VertexId, j: VertexId, n: usize) -> Result<()> {
    if i == j {
        return Err(Error::InvalidPair(i, j));
    }
    for v in [i, j] {
        if v as usize >= n {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                num_vertices: n,
            });
        }
    }
    Ok(())
}

/// Undirected simple graph over dense vertex ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairwiseGraph {
    adjacency: Vec<BTreeSet<VertexId>>,
    num_edges: usize,
}

impl PairwiseGraph {
    pub fn new(num_vertices: usize) -> Self {
        PairwiseGraph {
            adjacency: vec![BTreeSet::new(); num_vertices],
            num_edges: 0,
        }
    }

    pub fn from_edges(num_vertices: usize, edges: &[Pair]) -> Result<Self> {
        let mut g = PairwiseGraph::new(num_vertices);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Inserts `(i, j)`; returns false if it was already present.
    pub fn add_edge(&mut self, i: VertexId, j: VertexId) -> Result<bool> {
        check_pair(i, j, self.num_vertices())?;
        Ok(self.insert_unchecked(i, j))
    }

    fn insert_unchecked(&mut self, i: VertexId, j: VertexId) -> bool {
        let fresh = self.adjacency[i as usize].insert(j);
        if fresh {
            self.adjacency[j as usize].insert(i);
            self.num_edges += 1;
        }
        fresh
    }

    pub fn remove_edge(&mut self, i: VertexId, j: VertexId) -> bool {
        let (Some(a), Some(b)) = (self.adjacency.get(i as usize), self.adjacency.get(j as usize)) else {
            return false;
        };
        if !a.contains(&j) || !b.contains(&i) {
            return false;
        }
        self.adjacency[i as usize].remove(&j);
        self.adjacency[j as usize].remove(&i);
        self.num_edges -= 1;
        true
    }

    /// `A_ij`; false for self-pairs and out-of-range ids.
    pub fn has_edge(&self, i: VertexId, j: VertexId) -> bool {
        self.adjacency.get(i as usize).is_some_and(|n| n.contains(&j))
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency[v as usize].iter().copied()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v as usize].len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Pair> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, ns)| {
            let i = i as VertexId;
            ns.range((i + 1)..).map(move |&j| (i, j))
        })
    }

    pub fn is_empty(&self) -> bool {
        self.num_edges == 0
    }

    /// The graph as a hypergraph of 2-edges.
    pub fn to_hypergraph(&self) -> Hypergraph {
        let mut h = Hypergraph::new(self.num_vertices());
        for (i, j) in self.edges() {
            h.edges.insert(Hyperedge::from_sorted_unchecked(vec![i, j]), 1);
        }
        h
    }
}
