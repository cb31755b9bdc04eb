//! Loading n-ary relational datasets as hypergraphs.
//!
//! Supported layouts:
//! - `nary-tsv`: `relation<TAB>e1<TAB>e2...` per line; the relation label is
//!   dropped and the entity set becomes one hyperedge.
//! - `simplex-list`: whitespace-separated entity names per line.
//! - `hg`: the native `.hg` format; entity names are the decimal ids.
//!
//! Repeated entities within a fact are collapsed; facts left with fewer than
//! two entities are skipped and counted. Identical facts accumulate
//! multiplicity. Several files (e.g. train/valid/test splits) can be
//! concatenated into one hypergraph.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::parse_hypergraph;
use crate::hypergraph::{Hyperedge, Hypergraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetFormat {
    NaryTsv,
    SimplexList,
    Hg,
}

impl FromStr for DatasetFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nary-tsv" => Ok(DatasetFormat::NaryTsv),
            "simplex-list" => Ok(DatasetFormat::SimplexList),
            "hg" => Ok(DatasetFormat::Hg),
            other => Err(Error::InvalidParams(format!("unknown format '{other}'"))),
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::NaryTsv => "nary-tsv",
            DatasetFormat::SimplexList => "simplex-list",
            DatasetFormat::Hg => "hg",
        })
    }
}

/// Bijective entity name <-> dense id map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntityDictionary {
    names: Vec<String>,
    ids: HashMap<String, VertexId>,
}

impl EntityDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, assigning the next free id if unseen.
    pub fn intern(&mut self, name: &str) -> VertexId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as VertexId;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<VertexId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: VertexId) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    /// Entity names indexed by id.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub format: String,
    pub files: Vec<String>,
    pub facts_read: u64,
    pub facts_skipped: u64,
    /// Hyperedges produced, counting multiplicity.
    pub hyperedges_produced: u64,
    pub distinct_hyperedges: u64,
    /// size -> hyperedges of that size, counting multiplicity
    pub size_histogram: BTreeMap<usize, u64>,
    pub entities: usize,
    pub relation_labels_dropped: usize,
}

/// Raw facts as entity-name lists before id assignment.
fn facts_from_text(text: &str, format: DatasetFormat, labels: &mut BTreeSet<String>) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| match format {
            DatasetFormat::NaryTsv => {
                let mut fields = line.trim_end_matches(['\r', '\n']).split('\t');
                if let Some(rel) = fields.next() {
                    labels.insert(rel.trim().to_owned());
                }
                fields
                    .map(str::trim)
                    .filter(|f| !f.is_empty())
                    .map(str::to_owned)
                    .collect()
            }
            DatasetFormat::SimplexList => line.split_whitespace().map(str::to_owned).collect(),
            DatasetFormat::Hg => unreachable!("hg is parsed natively"),
        })
        .collect()
}

/// Parses one or more files of the same format into a single hypergraph.
pub fn ingest<P: AsRef<Path>>(
    paths: &[P],
    format: DatasetFormat,
) -> Result<(Hypergraph, EntityDictionary, IngestReport)> {
    let mut texts = Vec::with_capacity(paths.len());
    for p in paths {
        texts.push(std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?);
    }
    let names = paths.iter().map(|p| p.as_ref().display().to_string()).collect();
    ingest_texts(&texts, format, names)
}

pub fn ingest_texts(
    texts: &[String],
    format: DatasetFormat,
    files: Vec<String>,
) -> Result<(Hypergraph, EntityDictionary, IngestReport)> {
    let mut report = IngestReport {
        format: format.to_string(),
        files,
        ..IngestReport::default()
    };
    let mut dict = EntityDictionary::new();

    let h = if format == DatasetFormat::Hg {
        let parts = texts.iter().map(|t| parse_hypergraph(t)).collect::<Result<Vec<_>>>()?;
        let n = parts.iter().map(Hypergraph::num_vertices).max().unwrap_or(0);
        let mut h = Hypergraph::new(n);
        for part in &parts {
            report.facts_read += part.total_edges();
            for (e, m) in part.iter() {
                h.add_edge(e.clone(), m)?;
            }
        }
        for v in 0..h.num_vertices() {
            dict.intern(&v.to_string());
        }
        h
    } else {
        let mut labels = BTreeSet::new();
        let mut edges: Vec<Hyperedge> = Vec::new();
        for text in texts {
            for fact in facts_from_text(text, format, &mut labels) {
                report.facts_read += 1;
                let mut ids: Vec<VertexId> = fact.iter().map(|name| dict.intern(name)).collect();
                ids.sort_unstable();
                ids.dedup();
                if ids.len() < 2 {
                    report.facts_skipped += 1;
                    continue;
                }
                edges.push(Hyperedge::new(ids)?);
            }
        }
        report.relation_labels_dropped = labels.len();
        let mut h = Hypergraph::new(dict.len());
        for e in edges {
            h.add_edge(e, 1)?;
        }
        h
    };

    if h.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} facts read, none produced a hyperedge",
            report.facts_read
        )));
    }
    report.hyperedges_produced = h.total_edges();
    report.distinct_hyperedges = h.num_distinct() as u64;
    for (e, m) in h.iter() {
        *report.size_histogram.entry(e.len()).or_insert(0) += m as u64;
    }
    report.entities = h.num_vertices();
    Ok((h, dict, report))
}

/// Uniform sample of `max_edges` distinct hyperedges (multiplicities kept),
/// with vertices re-densified in increasing order of their old ids. Returns
/// the sample and the old id of each new vertex.
pub fn subsample(h: &Hypergraph, max_edges: usize, seed: u64) -> Result<(Hypergraph, Vec<VertexId>)> {
    if max_edges == 0 {
        return Err(Error::InvalidParams("max_edges must be positive".into()));
    }
    let all: Vec<(&Hyperedge, u32)> = h.iter().collect();
    let chosen: Vec<usize> = if max_edges >= all.len() {
        (0..all.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picks = index::sample(&mut rng, all.len(), max_edges).into_vec();
        picks.sort_unstable();
        picks
    };
    let used: BTreeSet<VertexId> = chosen
        .iter()
        .flat_map(|&k| all[k].0.vertices().iter().copied())
        .collect();
    let old_ids: Vec<VertexId> = used.into_iter().collect();
    let remap: HashMap<VertexId, VertexId> = old_ids
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new as VertexId))
        .collect();
    let mut out = Hypergraph::new(old_ids.len());
    for k in chosen {
        let (e, m) = all[k];
        out.add_edge(Hyperedge::new(e.vertices().iter().map(|v| remap[v]).collect())?, m)?;
    }
    Ok((out, old_ids))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tsv(lines: &[&str]) -> Result<(Hypergraph, EntityDictionary, IngestReport)> {
        ingest_texts(&[lines.join("\n")], DatasetFormat::NaryTsv, vec![])
    }

    #[test]
    fn nary_line_becomes_hyperedge() {
        let (h, dict, report) = tsv(&["produces\tA\tB\tC"]).unwrap();
        assert_eq!(h, Hypergraph::from_edges(3, [vec![0, 1, 2]]).unwrap());
        assert_eq!(dict.name(2), Some("C"));
        assert_eq!(report.relation_labels_dropped, 1);
        assert_eq!(report.size_histogram, [(3, 1)].into());
    }

    #[test]
    fn duplicates_accumulate_multiplicity() {
        let (h, _, report) = tsv(&["r\tA\tB", "s\tB\tA"]).unwrap();
        assert_eq!(h.total_edges(), 2);
        assert_eq!(h.num_distinct(), 1);
        assert_eq!(report.hyperedges_produced, 2);
        assert_eq!(report.distinct_hyperedges, 1);
    }

    #[test]
    fn degenerate_facts_are_skipped() {
        let (h, _, report) = tsv(&["rel\tA\tA", "rel\tA\tB\tA"]).unwrap();
        assert_eq!(report.facts_read, 2);
        assert_eq!(report.facts_skipped, 1);
        assert_eq!(h.total_edges(), 1);
        assert!(matches!(tsv(&["rel\tA\tA"]), Err(Error::EmptyDataset(_))));
        assert!(matches!(tsv(&[]), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn simplex_and_hg_formats() {
        let (h, _, _) = ingest_texts(&["x y z\ny z\n".into()], DatasetFormat::SimplexList, vec![]).unwrap();
        assert_eq!(h.num_distinct(), 2);
        let (h, dict, _) = ingest_texts(&["#vertices 4\n0 1 2\n2 3*2\n".into()], DatasetFormat::Hg, vec![]).unwrap();
        assert_eq!(h.total_edges(), 3);
        assert_eq!(dict.id("3"), Some(3));
    }

    #[test]
    fn splits_concatenate() {
        let (h, _, report) = ingest_texts(
            &["r\tA\tB".into(), "r\tB\tC\tD".into()],
            DatasetFormat::NaryTsv,
            vec!["train".into(), "test".into()],
        )
        .unwrap();
        assert_eq!(h.num_distinct(), 2);
        assert_eq!(report.entities, 4);
    }

    #[test]
    fn unknown_format() {
        assert!("csv".parse::<DatasetFormat>().is_err());
        assert_eq!("nary-tsv".parse::<DatasetFormat>().unwrap(), DatasetFormat::NaryTsv);
    }

    #[test]
    fn dictionary_round_trip() {
        let mut d = EntityDictionary::new();
        for name in ["a", "b", "a", "c"] {
            let id = d.intern(name);
            assert_eq!(d.name(id), Some(name));
        }
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn permuted_lines_give_isomorphic_hypergraphs() {
        let lines = ["r\tA\tB\tC", "r\tC\tD", "r\tD\tE\tA", "r\tB\tE"];
        let (h1, d1, _) = tsv(&lines).unwrap();
        let mut rev = lines;
        rev.reverse();
        let (h2, d2, _) = tsv(&rev).unwrap();
        let named = |h: &Hypergraph, d: &EntityDictionary| -> BTreeSet<Vec<String>> {
            h.distinct_edges()
                .map(|e| {
                    let mut v: Vec<String> = e.vertices().iter().map(|&i| d.name(i).unwrap().to_owned()).collect();
                    v.sort();
                    v
                })
                .collect()
        };
        assert_eq!(named(&h1, &d1), named(&h2, &d2));
    }

    #[test]
    fn subsample_rules() {
        let h = Hypergraph::from_edges(10, [vec![0, 1], vec![2, 3, 4], vec![5, 9], vec![6, 7, 8]]).unwrap();
        let (all, ids) = subsample(&h, 10, 1).unwrap();
        assert_eq!(all.num_distinct(), 4);
        assert_eq!(all.num_vertices(), 10);
        assert_eq!(ids, (0..10).collect::<Vec<_>>());
        let (one, ids) = subsample(&h, 1, 1).unwrap();
        assert_eq!(one.num_distinct(), 1);
        assert_eq!(one.num_vertices(), ids.len());
        assert_eq!(subsample(&h, 2, 9).unwrap(), subsample(&h, 2, 9).unwrap());
        assert!(subsample(&h, 0, 1).is_err());
    }
}
