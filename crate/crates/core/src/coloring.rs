//! Phase-ordering graph coloring.
//!
//! Frequency-locked oscillators coupled along graph edges settle into a
//! cyclic phase order in which mutually non-adjacent nodes sit next to each
//! other. Cutting that cycle greedily into runs of independent nodes gives a
//! proper coloring. A backtracking chromatic-number search serves as the
//! independent reference.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{wrap_deg, PhaseReport};
use crate::graph::Graph;
use crate::{Error, Result};

/// Nodes (0-based) in ascending phase order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CyclicOrder {
    pub sequence: Vec<usize>,
    pub phases_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coloring {
    /// Color id (starting at 1) of every node.
    pub assignment: Vec<usize>,
    pub num_colors: usize,
}

impl Coloring {
    pub fn from_assignment(assignment: Vec<usize>) -> Self {
        let mut distinct = assignment.clone();
        distinct.sort_unstable();
        distinct.dedup();
        Self {
            num_colors: distinct.len(),
            assignment,
        }
    }

    /// Color classes as sorted node lists, ordered by color id.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut ids: Vec<usize> = self.assignment.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.iter()
            .map(|&c| {
                self.assignment
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a == c)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringVerdict {
    pub valid: bool,
    /// Monochromatic edges, 0-based.
    pub violations: Vec<(usize, usize)>,
}

/// Sorts nodes by phase reduced to `[0, 360)`; equal phases keep index order.
pub fn phase_order(report: &PhaseReport) -> CyclicOrder {
    order_by_phase(&report.phases_deg)
}

pub fn order_by_phase(phases_deg: &[f64]) -> CyclicOrder {
    let wrapped: Vec<f64> = phases_deg.iter().map(|&p| wrap_deg(p)).collect();
    let mut sequence: Vec<usize> = (0..wrapped.len()).collect();
    sequence.sort_by(|&a, &b| wrapped[a].total_cmp(&wrapped[b]));
    CyclicOrder {
        sequence,
        phases_deg: wrapped,
    }
}

/// Greedy cut of one linear sequence into runs of mutually non-adjacent nodes.
fn greedy_runs(seq: impl Iterator<Item = usize>, adj: &[bool], n: usize) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for node in seq {
        match classes.last_mut() {
            Some(cur) if cur.iter().all(|&m| !adj[m * n + node]) => cur.push(node),
            _ => classes.push(vec![node]),
        }
    }
    classes
}

/// Tries every rotation of the cyclic order and keeps the one with the
/// fewest classes (earliest rotation on ties).
pub fn cyclic_greedy_coloring(order: &CyclicOrder, g: &Graph) -> Coloring {
    let n = g.n();
    let seq = &order.sequence;
    if seq.is_empty() {
        return Coloring {
            assignment: Vec::new(),
            num_colors: 0,
        };
    }
    let adj = g.adjacency();
    let mut best: Option<Vec<Vec<usize>>> = None;
    for r in 0..seq.len() {
        let rotated = seq[r..].iter().chain(&seq[..r]).copied();
        let classes = greedy_runs(rotated, &adj, n);
        if best.as_ref().is_none_or(|b| classes.len() < b.len()) {
            best = Some(classes);
        }
    }
    let mut assignment = vec![0; n];
    for (c, class) in best.unwrap().iter().enumerate() {
        for &node in class {
            assignment[node] = c + 1;
        }
    }
    Coloring::from_assignment(assignment)
}

pub fn verify_coloring(g: &Graph, c: &Coloring) -> Result<ColoringVerdict> {
    if c.assignment.len() < g.n() {
        return Err(Error::IncompleteColoring(c.assignment.len()));
    }
    if let Some(i) = c.assignment.iter().take(g.n()).position(|&a| a == 0) {
        return Err(Error::IncompleteColoring(i));
    }
    let violations: Vec<_> = g
        .edges()
        .iter()
        .copied()
        .filter(|&(a, b)| c.assignment[a] == c.assignment[b])
        .collect();
    Ok(ColoringVerdict {
        valid: violations.is_empty(),
        violations,
    })
}

pub const DEFAULT_NODE_LIMIT: usize = 16;

/// Exact chromatic number by backtracking. Nodes are visited by descending
/// degree; a node may only open the next unused color, so the first node
/// is always color 0.
pub fn chromatic_number_bruteforce(g: &Graph, node_limit: usize) -> Result<usize> {
    let n = g.n();
    if n > node_limit {
        return Err(Error::GraphTooLarge {
            n,
            limit: node_limit,
        });
    }
    if n == 0 {
        return Ok(0);
    }
    if g.edges().is_empty() {
        return Ok(1);
    }
    let adj = g.adjacency();
    let deg = g.degrees();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));

    fn extend(
        pos: usize,
        used: usize,
        k: usize,
        order: &[usize],
        adj: &[bool],
        colors: &mut [usize],
    ) -> bool {
        let n = colors.len();
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        for c in 0..(used + 1).min(k) {
            if order[..pos]
                .iter()
                .any(|&u| adj[u * n + v] && colors[u] == c)
            {
                continue;
            }
            colors[v] = c;
            if extend(pos + 1, used.max(c + 1), k, order, adj, colors) {
                return true;
            }
        }
        colors[v] = usize::MAX;
        false
    }

    let mut colors = vec![usize::MAX; n];
    for k in 2..=n {
        if extend(0, 0, k, &order, &adj, &mut colors) {
            return Ok(k);
        }
    }
    Ok(n)
}
