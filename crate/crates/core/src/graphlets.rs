//! Connected 4-node induced-subgraph census with per-edge incidence counts.
//!
//! Enumeration walks each root's extension sets so every connected 4-node
//! node set is visited exactly once; classes are keyed by sorted induced
//! degree sequence, a complete invariant for connected 4-node graphs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::netmodel::SimpleGraph;

/// The six connected 4-node graphlet classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum GraphletClass {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
}

impl GraphletClass {
    pub const ALL: [GraphletClass; 6] = [
        GraphletClass::M1,
        GraphletClass::M2,
        GraphletClass::M3,
        GraphletClass::M4,
        GraphletClass::M5,
        GraphletClass::M6,
    ];

    /// Position in count vectors: M1 → 0, …, M6 → 5.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["M1", "M2", "M3", "M4", "M5", "M6"][self.index()]
    }

    /// Conventional shape name.
    pub fn shape(self) -> &'static str {
        ["star", "path", "paw", "cycle", "diamond", "clique"][self.index()]
    }

    /// Sorted induced degree sequence.
    pub fn degree_sequence(self) -> [u8; 4] {
        [
            [1, 1, 1, 3],
            [1, 1, 2, 2],
            [1, 2, 2, 3],
            [2, 2, 2, 2],
            [2, 2, 3, 3],
            [3, 3, 3, 3],
        ][self.index()]
    }

    /// Number of edges in one occurrence of the class.
    pub fn edge_count(self) -> usize {
        [3, 3, 4, 4, 5, 6][self.index()]
    }

    /// Class with the given sorted degree sequence; `None` for sequences of
    /// disconnected 4-node graphs (any zero, or two disjoint edges).
    pub fn from_degree_sequence(seq: [u8; 4]) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.degree_sequence() == seq)
    }
}

/// Per-edge and whole-graph counts of graphlet occurrences. An occurrence
/// increments the count of every edge it contains by one and the class total
/// by one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphletCensus {
    per_edge: Vec<[u64; 6]>,
    totals: [u64; 6],
}

impl GraphletCensus {
    fn empty(edge_count: usize) -> Self {
        Self {
            per_edge: vec![[0; 6]; edge_count],
            totals: [0; 6],
        }
    }

    /// Assembles a census from raw parts; used by independent validators.
    pub fn from_parts(per_edge: Vec<[u64; 6]>, totals: [u64; 6]) -> Self {
        Self { per_edge, totals }
    }

    fn merge(mut self, other: Self) -> Self {
        for (mine, theirs) in self.per_edge.iter_mut().zip(other.per_edge) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += t;
            }
        }
        for (m, t) in self.totals.iter_mut().zip(other.totals) {
            *m += t;
        }
        self
    }

    /// M1..M6 counts for a simple edge.
    pub fn edge_counts(&self, edge_id: usize) -> [u64; 6] {
        self.per_edge[edge_id]
    }

    /// Whole-graph occurrence totals per class.
    pub fn totals(&self) -> [u64; 6] {
        self.totals
    }

    pub fn edge_count(&self) -> usize {
        self.per_edge.len()
    }
}

/// Per-class percentage share of one edge's graphlet incidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeShare {
    /// Class count over the edge's total count, ×100.
    pub percentages: [f64; 6],
    /// Set when the edge participates in no graphlet at all.
    pub zero_total: bool,
}

/// Walks every connected 4-node induced subgraph containing `root` as its
/// smallest enumerated node. `closure` marks the growing subgraph and its
/// neighborhood so extension candidates stay exclusive; all marks are undone
/// before returning.
fn walk_root(
    graph: &SimpleGraph,
    root: usize,
    closure: &mut [bool],
    visit: &mut impl FnMut([usize; 4]),
) {
    fn extend(
        graph: &SimpleGraph,
        root: usize,
        sub: &mut Vec<usize>,
        ext: &mut Vec<usize>,
        closure: &mut [bool],
        visit: &mut impl FnMut([usize; 4]),
    ) {
        while let Some(w) = ext.pop() {
            if sub.len() == 3 {
                let mut nodes = [sub[0], sub[1], sub[2], w];
                nodes.sort_unstable();
                visit(nodes);
                continue;
            }
            // Extend with w's exclusive neighbors beyond the root; marking w
            // and its whole neighborhood keeps later candidates exclusive.
            let mut marked = Vec::new();
            let mut grown: Vec<usize> = Vec::new();
            for &u in graph.neighbors(w) {
                if u > root && !closure[u] {
                    grown.push(u);
                }
            }
            if !closure[w] {
                closure[w] = true;
                marked.push(w);
            }
            for &u in graph.neighbors(w) {
                if !closure[u] {
                    closure[u] = true;
                    marked.push(u);
                }
            }
            let mut next_ext: Vec<usize> = ext.clone();
            next_ext.extend(grown);
            sub.push(w);
            extend(graph, root, sub, &mut next_ext, closure, visit);
            sub.pop();
            for u in marked {
                closure[u] = false;
            }
        }
    }

    let mut marked = vec![root];
    closure[root] = true;
    for &u in graph.neighbors(root) {
        closure[u] = true;
        marked.push(u);
    }
    let mut ext: Vec<usize> = graph
        .neighbors(root)
        .iter()
        .copied()
        .filter(|&u| u > root)
        .collect();
    let mut sub = vec![root];
    extend(graph, root, &mut sub, &mut ext, closure, visit);
    for u in marked {
        closure[u] = false;
    }
}

/// Enumerates every connected 4-node induced subgraph exactly once, as
/// sorted node quadruples.
pub fn enumerate_4subgraphs(graph: &SimpleGraph) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    let mut closure = vec![false; graph.node_count()];
    for root in 0..graph.node_count() {
        walk_root(graph, root, &mut closure, &mut |nodes| out.push(nodes));
    }
    out
}

/// Classifies a connected 4-node induced subgraph by its degree sequence.
pub fn classify(graph: &SimpleGraph, nodes: [usize; 4]) -> Result<GraphletClass> {
    let mut degrees = [0u8; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            if graph.has_edge(nodes[i], nodes[j]) {
                degrees[i] += 1;
                degrees[j] += 1;
            }
        }
    }
    degrees.sort_unstable();
    GraphletClass::from_degree_sequence(degrees)
        .ok_or_else(|| Error::Contract(format!("induced subgraph on {nodes:?} is disconnected")))
}

fn record_occurrence(graph: &SimpleGraph, nodes: [usize; 4], census: &mut GraphletCensus) {
    let class = classify(graph, nodes).expect("enumeration emits connected subgraphs");
    census.totals[class.index()] += 1;
    for i in 0..4 {
        for j in i + 1..4 {
            if let Some(edge) = graph.edge_id(nodes[i], nodes[j]) {
                census.per_edge[edge][class.index()] += 1;
            }
        }
    }
}

/// Full census: every occurrence tallied on the class total and on each of
/// its edges. Roots are partitioned across workers; the merged result is
/// schedule-independent.
pub fn edge_census(graph: &SimpleGraph) -> GraphletCensus {
    use rayon::prelude::*;

    let n = graph.node_count();
    (0..n)
        .into_par_iter()
        .fold(
            || (GraphletCensus::empty(graph.edge_count()), vec![false; n]),
            |(mut census, mut closure), root| {
                walk_root(graph, root, &mut closure, &mut |nodes| {
                    record_occurrence(graph, nodes, &mut census);
                });
                (census, closure)
            },
        )
        .map(|(census, _)| census)
        .reduce(
            || GraphletCensus::empty(graph.edge_count()),
            GraphletCensus::merge,
        )
}

/// Percentage share of each class in one edge's counts.
pub fn edge_percentages(census: &GraphletCensus, edge_id: usize) -> EdgeShare {
    let counts = census.edge_counts(edge_id);
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return EdgeShare {
            percentages: [0.0; 6],
            zero_total: true,
        };
    }
    let mut percentages = [0.0; 6];
    for (p, &c) in percentages.iter_mut().zip(&counts) {
        *p = c as f64 / total as f64 * 100.0;
    }
    EdgeShare {
        percentages,
        zero_total: false,
    }
}
