//! Undirected weighted graphs and the edge-list text format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, parse_rational, Rational};

/// Undirected graph without self-loops; at most one edge per vertex pair.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    /// Canonical edges `(u, v, w)` with `u < v`, sorted.
    edges: Vec<(usize, usize, Rational)>,
    adj: Vec<Vec<(usize, Rational)>>,
}

impl WeightedGraph {
    /// Builds a graph, summing weights of repeated pairs. Self-loops and negative
    /// weights are rejected.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let mut acc: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (u, v, w) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, size: n });
                }
            }
            if u == v {
                return Err(Error::Formulation(format!("self-loop at vertex {u}")));
            }
            if w.is_negative() {
                return Err(Error::Formulation(format!("negative weight {w} on edge ({u},{v})")));
            }
            *acc.entry((u.min(v), u.max(v))).or_insert_with(Rational::zero) += w;
        }
        Ok(Self::from_canonical(n, acc))
    }

    pub fn unweighted<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(n, edges.into_iter().map(|(u, v)| (u, v, int(1))))
    }

    fn from_canonical(n: usize, acc: BTreeMap<(usize, usize), Rational>) -> Self {
        let edges: Vec<_> = acc.into_iter().map(|((u, v), w)| (u, v, w)).collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in &mut adj {
            list.sort_by_key(|(v, _)| *v);
        }
        Self { n, edges, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize, Rational)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, Rational)] {
        &self.adj[u]
    }

    pub fn weight(&self, u: usize, v: usize) -> Rational {
        self.adj[u]
            .binary_search_by_key(&v, |(x, _)| *x)
            .map(|pos| self.adj[u][pos].1)
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn weighted_degree(&self, u: usize) -> Rational {
        self.adj[u].iter().map(|(_, w)| *w).sum()
    }

    /// Dense row-major Laplacian `D - W`.
    pub fn laplacian(&self) -> Vec<Rational> {
        let n = self.n;
        let mut l = vec![Rational::zero(); n * n];
        for &(u, v, w) in &self.edges {
            l[u * n + v] -= w;
            l[v * n + u] -= w;
            l[u * n + u] += w;
            l[v * n + v] += w;
        }
        l
    }

    /// Serializes in the 0-based `u v w` edge-list format with an `n` header comment.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# vertices {}", self.n);
        for (u, v, w) in &self.edges {
            let _ = writeln!(out, "{u} {v} {w}");
        }
        out
    }
}

/// Result of [`parse_edge_list`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedGraph {
    pub graph: WeightedGraph,
    pub dropped_self_loops: usize,
}

/// Parses an edge list.
///
/// Plain lines are `u v [w]` with 0-based vertices and default weight 1. `#`
/// starts a comment; a `# vertices N` comment fixes the vertex count. DIMACS
/// lines are also accepted: `c ...` comments, `p edge N M` headers and 1-based
/// `e u v [w]` edges. Repeated pairs are merged by summing weights; self-loops
/// are dropped and counted.
pub fn parse_edge_list(text: &str) -> Result<ParsedGraph> {
    let mut n_header: Option<usize> = None;
    let mut raw: Vec<(usize, usize, Rational)> = Vec::new();
    let mut dropped = 0usize;
    let mut max_vertex: Option<usize> = None;

    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut parts = comment.split_whitespace();
            if parts.next() == Some("vertices") {
                let n = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line_no, "bad vertex count"))?;
                n_header = Some(n);
            }
            continue;
        }
        let content = trimmed.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let (fields, one_based) = match tokens[0] {
            "c" => continue,
            "p" => {
                let n = tokens
                    .get(2)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line_no, "bad DIMACS header"))?;
                n_header = Some(n);
                continue;
            }
            "e" => (&tokens[1..], true),
            _ => (&tokens[..], false),
        };
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::parse(line_no, format!("expected 'u v [w]', got '{content}'")));
        }
        let vertex = |t: &str| -> Result<usize> {
            let v: usize = t
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad vertex '{t}'")))?;
            if one_based {
                v.checked_sub(1)
                    .ok_or_else(|| Error::parse(line_no, "DIMACS vertices are 1-based"))
            } else {
                Ok(v)
            }
        };
        let u = vertex(fields[0])?;
        let v = vertex(fields[1])?;
        let w = match fields.get(2) {
            Some(t) => parse_rational(t).ok_or_else(|| Error::parse(line_no, format!("bad weight '{t}'")))?,
            None => int(1),
        };
        if w.is_negative() {
            return Err(Error::parse(line_no, format!("negative weight {w}")));
        }
        max_vertex = Some(max_vertex.map_or(u.max(v), |m| m.max(u).max(v)));
        if u == v {
            dropped += 1;
            continue;
        }
        raw.push((u, v, w));
    }
    let implied = max_vertex.map_or(0, |m| m + 1);
    let n = match n_header {
        Some(h) if h < implied => {
            return Err(Error::parse(0, format!("vertex {} exceeds declared count {h}", implied - 1)))
        }
        Some(h) => h,
        None => implied,
    };
    if dropped > 0 {
        log::warn!("dropped {dropped} self-loop(s) while parsing edge list");
    }
    Ok(ParsedGraph {
        graph: WeightedGraph::new(n, raw)?,
        dropped_self_loops: dropped,
    })
}

/// Generators for the structured graph families used in benchmarks.
pub mod families {
    use super::WeightedGraph;

    fn build(n: usize, edges: Vec<(usize, usize)>) -> WeightedGraph {
        WeightedGraph::unweighted(n, edges).expect("generator produces valid edges")
    }

    pub fn path(n: usize) -> WeightedGraph {
        build(n, (1..n).map(|v| (v - 1, v)).collect())
    }

    pub fn cycle(n: usize) -> WeightedGraph {
        let mut e: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        if n > 2 {
            e.push((n - 1, 0));
        }
        build(n, e)
    }

    pub fn complete(n: usize) -> WeightedGraph {
        build(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect())
    }

    /// Two paths of length `rungs` joined rung by rung; `2 * rungs` vertices.
    pub fn ladder(rungs: usize) -> WeightedGraph {
        let mut e = Vec::new();
        for i in 0..rungs {
            e.push((i, i + rungs));
            if i + 1 < rungs {
                e.push((i, i + 1));
                e.push((i + rungs, i + 1 + rungs));
            }
        }
        build(2 * rungs, e)
    }

    pub fn circular_ladder(rungs: usize) -> WeightedGraph {
        let mut e = Vec::new();
        for i in 0..rungs {
            let j = (i + 1) % rungs;
            e.push((i, i + rungs));
            e.push((i, j));
            e.push((i + rungs, j + rungs));
        }
        build(2 * rungs, e)
    }

    /// Complete `r`-ary tree of the given height (root at depth 0).
    pub fn balanced_tree(r: usize, height: usize) -> WeightedGraph {
        let mut n = 1usize;
        let mut level = 1usize;
        for _ in 0..height {
            level *= r;
            n += level;
        }
        full_rary_tree(r, n)
    }

    /// `n` vertices filled breadth-first into an `r`-ary tree.
    pub fn full_rary_tree(r: usize, n: usize) -> WeightedGraph {
        build(n, (1..n).map(|v| ((v - 1) / r, v)).collect())
    }

    /// Binomial tree `B_order` with `2^order` vertices.
    pub fn binomial_tree(order: u32) -> WeightedGraph {
        let mut edges = Vec::new();
        let mut n = 1usize;
        for _ in 0..order {
            let copy: Vec<_> = edges.iter().map(|&(u, v)| (u + n, v + n)).collect();
            edges.extend(copy);
            edges.push((0, n));
            n *= 2;
        }
        build(n, edges)
    }

    /// Recursive graph that adds, per generation, one vertex on every existing edge
    /// joined to both endpoints; `(3^g + 3) / 2` vertices and `3^g` edges.
    pub fn dorogovtsev_goltsev_mendes(generations: u32) -> WeightedGraph {
        let mut edges = vec![(0usize, 1usize)];
        let mut n = 2;
        for _ in 0..generations {
            let mut next = Vec::with_capacity(edges.len() * 3);
            for &(u, v) in &edges {
                next.push((u, v));
                next.push((u, n));
                next.push((v, n));
                n += 1;
            }
            edges = next;
        }
        build(n, edges)
    }

    /// Complete multipartite graph with `parts` near-equal parts.
    pub fn turan(n: usize, parts: usize) -> WeightedGraph {
        let part = |v: usize| v % parts;
        build(
            n,
            (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .filter(|(u, v)| part(*u) != part(*v))
                .collect(),
        )
    }
}
