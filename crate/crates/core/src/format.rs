//! Canonical text formats.
//!
//! `.hg` (hypergraph):
//!
//! ```text
//! #vertices 5
//! % comment
//! 0 1 2
//! 3 4*2
//! ```
//!
//! The first non-comment line declares the vertex count. Each further line is
//! one hyperedge as space-separated ids, optionally suffixed `*m` for
//! multiplicity `m > 1`. `.pg` (pairwise graph) uses the same layout with
//! exactly two ids per line and no multiplicity. Lines starting with `%` are
//! comments; blank lines are ignored. Writers emit edges in lexicographic order
//! with `\n` terminators, so output is byte-for-byte deterministic.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, Hypergraph, PairwiseGraph, VertexId};

const HEADER: &str = "#vertices";

/// One `.hg` body line for `edge` with multiplicity `m`, including the newline.
pub fn edge_line(edge: &Hyperedge, m: u32) -> String {
    let mut s = String::with_capacity(edge.len() * 4);
    for (k, v) in edge.vertices().iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
    if m > 1 {
        let _ = write!(s, "*{m}");
    }
    s.push('\n');
    s
}

pub fn write_hypergraph(h: &Hypergraph) -> String {
    write_hypergraph_with_comments(h, &[])
}

/// Serializes `h`, placing each of `comments` on a `%` line after the header.
pub fn write_hypergraph_with_comments(h: &Hypergraph, comments: &[String]) -> String {
    let mut out = header(h.num_vertices(), comments);
    for (e, m) in h.iter() {
        out.push_str(&edge_line(e, m));
    }
    out
}

pub fn write_pairwise(g: &PairwiseGraph) -> String {
    write_pairwise_with_comments(g, &[])
}

pub fn write_pairwise_with_comments(g: &PairwiseGraph, comments: &[String]) -> String {
    let mut out = header(g.num_vertices(), comments);
    for (i, j) in g.edges() {
        let _ = writeln!(out, "{i} {j}");
    }
    out
}

fn header(n: usize, comments: &[String]) -> String {
    let mut out = format!("{HEADER} {n}\n");
    for c in comments {
        let _ = writeln!(out, "% {c}");
    }
    out
}

struct Body<'a> {
    num_vertices: usize,
    lines: Vec<(usize, &'a str)>,
}

fn split_body(text: &str) -> Result<Body<'_>> {
    let mut num_vertices = None;
    let mut lines = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if num_vertices.is_none() {
            let rest = line.strip_prefix(HEADER).ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected '{HEADER} N' header"),
            })?;
            let n = rest.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid vertex count '{}'", rest.trim()),
            })?;
            num_vertices = Some(n);
            continue;
        }
        lines.push((line_no, line));
    }
    let num_vertices = num_vertices.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: format!("missing '{HEADER} N' header"),
    })?;
    Ok(Body { num_vertices, lines })
}

fn parse_ids(line_no: usize, body: &str, n: usize) -> Result<Vec<VertexId>> {
    body.split_whitespace()
        .map(|tok| {
            let v = tok.parse::<VertexId>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid vertex id '{tok}'"),
            })?;
            if v as usize >= n {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("vertex {v} out of range for {n} vertices"),
                });
            }
            Ok(v)
        })
        .collect()
}

pub fn parse_hypergraph(text: &str) -> Result<Hypergraph> {
    let body = split_body(text)?;
    let mut h = Hypergraph::new(body.num_vertices);
    for (line_no, line) in body.lines {
        let (ids, mult) = match line.split_once('*') {
            Some((ids, m)) => {
                let m = m
                    .trim()
                    .parse::<u32>()
                    .ok()
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("invalid multiplicity '{}'", m.trim()),
                    })?;
                (ids, m)
            }
            None => (line, 1),
        };
        let ids = parse_ids(line_no, ids, body.num_vertices)?;
        let edge = Hyperedge::new(ids).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        h.add_edge(edge, mult).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
    }
    Ok(h)
}

pub fn parse_pairwise(text: &str) -> Result<PairwiseGraph> {
    let body = split_body(text)?;
    let mut g = PairwiseGraph::new(body.num_vertices);
    for (line_no, line) in body.lines {
        if line.contains('*') {
            return Err(Error::Parse {
                line: line_no,
                message: "multiplicity not allowed in pairwise graph".into(),
            });
        }
        let ids = parse_ids(line_no, line, body.num_vertices)?;
        if ids.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 vertex ids, found {}", ids.len()),
            });
        }
        g.add_edge(ids[0], ids[1]).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
    }
    Ok(g)
}

pub fn read_hypergraph(path: impl AsRef<Path>) -> Result<Hypergraph> {
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    parse_hypergraph(&text)
}

pub fn read_pairwise(path: impl AsRef<Path>) -> Result<PairwiseGraph> {
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    parse_pairwise(&text)
}
