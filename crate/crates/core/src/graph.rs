//! Undirected simple graphs, DIMACS `.col` I/O and circulant generators.
//!
//! Nodes are 0-based in memory and 1-based in DIMACS text.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Canonicalizes edges to `(min, max)`, sorts and deduplicates them.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut canon = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {}", a + 1)));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) out of range for {} nodes",
                    a + 1,
                    b + 1,
                    n
                )));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Self { n, edges: canon })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Dense adjacency matrix, row-major.
    pub fn adjacency(&self) -> Vec<bool> {
        let mut adj = alloc::vec![false; self.n * self.n];
        for &(a, b) in &self.edges {
            adj[a * self.n + b] = true;
            adj[b * self.n + a] = true;
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = alloc::vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self { n, edges }
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(format!("cycle needs n >= 3, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    /// Four-cycle 1-2-3-4 with chord 1-3.
    pub fn diamond() -> Self {
        Self::new(4, alloc::vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap()
    }

    /// Ring of `n` nodes, each joined to its neighbours at distance `1..=k/2`.
    pub fn circulant(n: usize, k: usize) -> Result<Self> {
        circulant_graph(n, k)
    }

    pub fn to_dimacs(&self) -> String {
        serialize_dimacs(self)
    }
}

pub fn circulant_graph(n: usize, k: usize) -> Result<Graph> {
    if k < 2 || !k.is_multiple_of(2) || k >= n {
        return Err(Error::InvalidGraph(format!(
            "circulant needs even k with 2 <= k < n (n = {n}, k = {k})"
        )));
    }
    let edges = (0..n)
        .flat_map(|i| (1..=k / 2).map(move |d| (i, (i + d) % n)))
        .collect();
    Graph::new(n, edges)
}

pub fn parse_dimacs(text: &str) -> Result<Graph> {
    let err = |line: usize, msg: String| Error::Dimacs { line, msg };
    let mut n = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tok = raw.split_whitespace();
        match tok.next() {
            None | Some("c") => {}
            Some("p") => {
                if n.is_some() {
                    return Err(err(line, "duplicate problem line".into()));
                }
                let kind = tok.next();
                if kind != Some("edge") && kind != Some("col") {
                    return Err(err(line, format!("unsupported problem kind {kind:?}")));
                }
                let nodes = tok
                    .next()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| err(line, "missing node count".into()))?;
                n = Some(nodes);
            }
            Some("e") => {
                let nodes = n.ok_or_else(|| err(line, "edge before problem line".into()))?;
                let mut endpoint = || -> Result<usize> {
                    let v = tok
                        .next()
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| err(line, "malformed edge".into()))?;
                    if v == 0 || v > nodes {
                        return Err(err(line, format!("endpoint {v} out of range 1..={nodes}")));
                    }
                    Ok(v - 1)
                };
                let a = endpoint()?;
                let b = endpoint()?;
                if a == b {
                    return Err(err(line, format!("self-loop on node {}", a + 1)));
                }
                edges.push((a, b));
            }
            Some(other) => return Err(err(line, format!("unknown line type {other:?}"))),
        }
    }
    let n = n.ok_or_else(|| err(0, "missing problem line".into()))?;
    Graph::new(n, edges)
}

pub fn serialize_dimacs(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p edge {} {}", g.n, g.edges.len());
    for &(a, b) in &g.edges {
        let _ = writeln!(out, "e {} {}", a + 1, b + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn parses_triangle() {
        let g = parse_dimacs("c triangle\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(g, Graph::complete(3));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_dimacs("p edge 3 3\ne 4 1\n"),
            Err(Error::Dimacs { line: 2, .. })
        ));
        assert!(parse_dimacs("p edge 3 0\np edge 3 0\n").is_err());
        assert!(parse_dimacs("e 1 2\n").is_err());
        assert!(parse_dimacs("c nothing\n").is_err());
        assert!(parse_dimacs("p edge 3 1\ne 2 2\n").is_err());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = parse_dimacs("p edge 2 2\ne 1 2\ne 2 1\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn circulant_cases() {
        assert_eq!(circulant_graph(3, 2).unwrap(), Graph::complete(3));
        assert_eq!(circulant_graph(5, 4).unwrap(), Graph::complete(5));
        let g = circulant_graph(8, 4).unwrap();
        assert_eq!(g.edges().len(), 16);
        assert!(g.degrees().iter().all(|&d| d == 4));
        assert!(circulant_graph(8, 3).is_err());
        assert!(circulant_graph(4, 4).is_err());
        assert!(circulant_graph(4, 0).is_err());
    }

    #[test]
    fn self_loop_rejected() {
        assert!(Graph::new(2, vec![(1, 1)]).is_err());
        assert!(Graph::new(2, vec![(0, 2)]).is_err());
    }

    proptest! {
        #[test]
        fn dimacs_round_trip(n in 1usize..20, raw in proptest::collection::vec((0usize..20, 0usize..20), 0..60)) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b).collect();
            let g = Graph::new(n, edges).unwrap();
            prop_assert_eq!(parse_dimacs(&serialize_dimacs(&g)).unwrap(), g);
        }
    }
}
