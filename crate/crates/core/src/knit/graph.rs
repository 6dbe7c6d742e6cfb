use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected weighted graph with canonical `u < v` edges, sorted and merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    nodes: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Parallel edges are merged by summing their weights.
    pub fn new(nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            if a >= nodes || b >= nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) outside {nodes} nodes"
                )));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has invalid weight {w}"
                )));
            }
            *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }
        let edges = merged
            .into_iter()
            .map(|((u, v), weight)| Edge { u, v, weight })
            .collect();
        Ok(WeightedGraph { nodes, edges })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.u == node || e.v == node)
            .count()
    }

    /// Weighted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for e in &self.edges {
            adj[e.u].push((e.v, e.weight));
            adj[e.v].push((e.u, e.weight));
        }
        adj
    }

    /// Sum of weights of edges whose endpoints carry different labels.
    pub fn cut_weight(&self, assignment: &[usize]) -> f64 {
        self.edges
            .iter()
            .filter(|e| assignment[e.u] != assignment[e.v])
            .map(|e| e.weight)
            .sum()
    }

    /// Parses `u v weight` lines (`#` comments allowed). The node count is one past the
    /// largest index unless `nodes` is given.
    pub fn parse_edge_list(text: &str, nodes: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err("expected `u v weight`".into()));
            }
            let u: usize = fields[0]
                .parse()
                .map_err(|_| err(format!("invalid node {:?}", fields[0])))?;
            let v: usize = fields[1]
                .parse()
                .map_err(|_| err(format!("invalid node {:?}", fields[1])))?;
            let w: f64 = fields[2]
                .parse()
                .map_err(|_| err(format!("invalid weight {:?}", fields[2])))?;
            edges.push((u, v, w));
        }
        let inferred = edges
            .iter()
            .map(|&(u, v, _)| u.max(v) + 1)
            .max()
            .unwrap_or(0);
        WeightedGraph::new(nodes.unwrap_or(inferred).max(inferred), edges)
    }

    pub fn load(path: impl AsRef<Path>, nodes: Option<usize>) -> Result<Self> {
        WeightedGraph::parse_edge_list(&std::fs::read_to_string(path)?, nodes)
    }

    pub fn to_edge_list(&self) -> String {
        self.edges
            .iter()
            .map(|e| format!("{} {} {}\n", e.u, e.v, e.weight))
            .collect()
    }
}

/// One node per qubit; edge weight counts the two-qubit gates acting on that pair.
pub fn interaction_graph(c: &Circuit) -> WeightedGraph {
    let edges = c
        .gates()
        .iter()
        .filter(|g| g.kind.arity() == 2)
        .map(|g| (g.qubits()[0], g.qubits()[1], 1.0));
    WeightedGraph::new(c.n(), edges).expect("circuit gates reference valid distinct qubits")
}
