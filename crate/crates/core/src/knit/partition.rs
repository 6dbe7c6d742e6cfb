//! Capacity-constrained k-way min-cut on the qubit-interaction graph.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::WeightedGraph;
use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};

/// Largest graph the exhaustive oracle accepts.
pub const MAX_BRUTE_FORCE_NODES: usize = 12;
/// Random restarts of the local search.
pub const RESTARTS: usize = 20;

const EPS: f64 = 1e-9;

/// A node partition into non-empty blocks of at most `capacity` nodes.
///
/// `assignment[v]` is the block of `v`; blocks are numbered by first appearance, so the
/// assignment is the canonical (lexicographically smallest) labelling of the partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPartition {
    pub assignment: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub capacity: usize,
    pub cut_weight: f64,
}

impl GraphPartition {
    fn from_assignment(g: &WeightedGraph, raw: &[usize], capacity: usize) -> Self {
        let assignment = canonical(raw);
        let count = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (v, &b) in assignment.iter().enumerate() {
            blocks[b].push(v);
        }
        GraphPartition {
            cut_weight: g.cut_weight(&assignment),
            assignment,
            blocks,
            capacity,
        }
    }
}

/// Relabels blocks in order of first appearance.
fn canonical(assignment: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    assignment
        .iter()
        .map(|&b| {
            let next = map.len();
            *map.entry(b).or_insert(next)
        })
        .collect()
}

/// Orders by cut weight, then by canonical assignment.
fn better(a: (f64, &[usize]), b: (f64, &[usize])) -> bool {
    if a.0 < b.0 - EPS {
        return true;
    }
    if a.0 > b.0 + EPS {
        return false;
    }
    a.1.cmp(b.1) == Ordering::Less
}

fn check_feasible(nodes: usize, k: usize, m: usize) -> Result<()> {
    if k == 0 || m == 0 || k.saturating_mul(m) < nodes {
        return Err(Error::InfeasiblePartition {
            nodes,
            blocks: k,
            capacity: m,
        });
    }
    Ok(())
}

/// Blocks needed to hold `n` nodes at capacity `m`.
pub fn default_block_count(n: usize, m: usize) -> usize {
    n.div_ceil(m.max(1)).max(1)
}

/// Exhaustive search over capacity-feasible partitions into at most `k` blocks.
///
/// Returns the globally minimal cut; ties go to the lexicographically smallest canonical
/// assignment.
pub fn brute_force_min_cut(g: &WeightedGraph, k: usize, m: usize) -> Result<GraphPartition> {
    let n = g.nodes();
    if n > MAX_BRUTE_FORCE_NODES {
        return Err(Error::CapacityExceeded {
            what: "brute-force min cut",
            limit: MAX_BRUTE_FORCE_NODES,
            got: n,
        });
    }
    check_feasible(n, k, m)?;
    // Edges grouped by their larger endpoint so partial cuts can be accumulated node by node.
    let mut back: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in g.edges() {
        back[e.v].push((e.u, e.weight));
    }
    struct Search<'a> {
        back: &'a [Vec<(usize, f64)>],
        k: usize,
        m: usize,
        labels: Vec<usize>,
        sizes: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, v: usize, used: usize, partial: f64) {
            if let Some((best, _)) = &self.best {
                if partial > best - EPS {
                    return;
                }
            }
            let n = self.labels.len();
            if v == n {
                self.best = Some((partial, self.labels.clone()));
                return;
            }
            // Restricted growth: node v may join an existing block or open block `used`.
            let limit = (used + 1).min(self.k);
            for b in 0..limit {
                if self.sizes[b] == self.m {
                    continue;
                }
                let added: f64 = self.back[v]
                    .iter()
                    .filter(|&&(u, _)| self.labels[u] != b)
                    .map(|&(_, w)| w)
                    .sum();
                self.labels[v] = b;
                self.sizes[b] += 1;
                self.go(v + 1, used.max(b + 1), partial + added);
                self.sizes[b] -= 1;
            }
        }
    }
    let mut s = Search {
        back: &back,
        k,
        m,
        labels: vec![0; n],
        sizes: vec![0; k],
        best: None,
    };
    s.go(0, 0, 0.0);
    let (_, labels) = s
        .best
        .expect("feasible instance has at least one partition");
    Ok(GraphPartition::from_assignment(g, &labels, m))
}

/// Local-search k-way min cut: seeded greedy construction followed by best-improvement
/// single-node moves and pairwise swaps, repeated over [`RESTARTS`] random orders.
pub fn kway_min_cut(g: &WeightedGraph, k: usize, m: usize, seed: u64) -> Result<GraphPartition> {
    let n = g.nodes();
    check_feasible(n, k, m)?;
    if n == 0 {
        return Ok(GraphPartition::from_assignment(g, &[], m));
    }
    let adj = g.adjacency();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..RESTARTS {
        let mut order: Vec<usize> = (0..n).collect();
        if restart > 0 {
            order.shuffle(&mut rng);
        }
        let mut assignment = greedy(&adj, &order, k, m);
        refine(&adj, &mut assignment, k, m);
        let labels = canonical(&assignment);
        let cut = g.cut_weight(&labels);
        if best
            .as_ref()
            .is_none_or(|(bc, bl)| better((cut, &labels), (*bc, bl)))
        {
            best = Some((cut, labels));
        }
    }
    let (_, labels) = best.expect("at least one restart");
    Ok(GraphPartition::from_assignment(g, &labels, m))
}

fn greedy(adj: &[Vec<(usize, f64)>], order: &[usize], k: usize, m: usize) -> Vec<usize> {
    let n = adj.len();
    let mut assignment = vec![usize::MAX; n];
    let mut sizes = vec![0usize; k];
    for &v in order {
        let mut affinity = vec![0.0; k];
        for &(u, w) in &adj[v] {
            if assignment[u] != usize::MAX {
                affinity[assignment[u]] += w;
            }
        }
        let mut choice = None;
        for b in 0..k {
            if sizes[b] == m {
                continue;
            }
            // Prefer connected blocks, then fuller blocks, then lower index.
            let key = (affinity[b], sizes[b]);
            match choice {
                None => choice = Some((b, key)),
                Some((_, (ca, cs)))
                    if key.0 > ca + EPS || ((key.0 - ca).abs() <= EPS && key.1 > cs) =>
                {
                    choice = Some((b, key))
                }
                _ => {}
            }
        }
        let (b, _) = choice.expect("k * m >= n leaves room");
        assignment[v] = b;
        sizes[b] += 1;
    }
    assignment
}

fn refine(adj: &[Vec<(usize, f64)>], assignment: &mut [usize], k: usize, m: usize) {
    let n = adj.len();
    let mut sizes = vec![0usize; k];
    for &b in assignment.iter() {
        sizes[b] += 1;
    }
    // conn[v][b]: weight from v into block b.
    let mut conn = vec![vec![0.0; k]; n];
    for v in 0..n {
        for &(u, w) in &adj[v] {
            conn[v][assignment[u]] += w;
        }
    }
    let edge_weight = |a: usize, b: usize| {
        adj[a]
            .iter()
            .filter(|&&(u, _)| u == b)
            .map(|&(_, w)| w)
            .sum::<f64>()
    };
    loop {
        // (gain, move) where move is either (v, target block) or a swap (u, v).
        let mut best_gain = EPS;
        let mut best_move: Option<(usize, usize, bool)> = None;
        for v in 0..n {
            let from = assignment[v];
            for to in 0..k {
                if to == from || sizes[to] == m {
                    continue;
                }
                let gain = conn[v][to] - conn[v][from];
                if gain > best_gain {
                    best_gain = gain;
                    best_move = Some((v, to, false));
                }
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                let (bu, bv) = (assignment[u], assignment[v]);
                if bu == bv {
                    continue;
                }
                let w = edge_weight(u, v);
                let gain = (conn[u][bv] - conn[u][bu]) + (conn[v][bu] - conn[v][bv]) - 2.0 * w;
                if gain > best_gain {
                    best_gain = gain;
                    best_move = Some((u, v, true));
                }
            }
        }
        let Some((a, b, swap)) = best_move else { break };
        let mut relabel = |v: usize, to: usize, assignment: &mut [usize]| {
            let from = assignment[v];
            for &(u, w) in &adj[v] {
                conn[u][from] -= w;
                conn[u][to] += w;
            }
            sizes[from] -= 1;
            sizes[to] += 1;
            assignment[v] = to;
        };
        if swap {
            let (ba, bb) = (assignment[a], assignment[b]);
            relabel(a, bb, assignment);
            relabel(b, ba, assignment);
        } else {
            relabel(a, b, assignment);
        }
    }
}

/// A partition of a circuit's qubits together with the gates it cuts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub blocks: Vec<Vec<usize>>,
    pub capacity: usize,
    pub cut_weight: f64,
    /// Positions of the two-qubit gates whose operands lie in different blocks.
    pub cut_gates: Vec<usize>,
    /// Kind of each gate in `cut_gates`.
    #[serde(default)]
    pub cut_kinds: Vec<GateKind>,
}

impl PartitionPlan {
    /// Validates `blocks` against `c` and records the cut gates.
    pub fn from_blocks(c: &Circuit, blocks: Vec<Vec<usize>>, capacity: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; c.n()];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPlan(format!("block {b} is empty")));
            }
            if block.len() > capacity {
                return Err(Error::InvalidPlan(format!(
                    "block {b} has {} qubits, capacity {capacity}",
                    block.len()
                )));
            }
            for &q in block {
                if q >= c.n() {
                    return Err(Error::QubitOutOfRange { qubit: q, n: c.n() });
                }
                if owner[q] != usize::MAX {
                    return Err(Error::InvalidPlan(format!(
                        "qubit {q} appears in two blocks"
                    )));
                }
                owner[q] = b;
            }
        }
        if let Some(q) = owner.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPlan(format!("qubit {q} is not assigned")));
        }
        let mut cut_gates = Vec::new();
        let mut cut_kinds = Vec::new();
        for (pos, g) in c.gates().iter().enumerate() {
            if g.kind.arity() == 2 && owner[g.qubits()[0]] != owner[g.qubits()[1]] {
                cut_gates.push(pos);
                cut_kinds.push(g.kind);
            }
        }
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(PartitionPlan {
            blocks,
            capacity,
            cut_weight: cut_gates.len() as f64,
            cut_gates,
            cut_kinds,
        })
    }

    pub fn from_partition(c: &Circuit, p: &GraphPartition) -> Result<Self> {
        PartitionPlan::from_blocks(c, p.blocks.clone(), p.capacity)
    }

    /// Block index owning each qubit.
    pub fn owners(&self) -> Vec<usize> {
        let n = self.blocks.iter().map(|b| b.len()).sum();
        let mut owner = vec![0; n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &q in block {
                owner[q] = b;
            }
        }
        owner
    }

    /// Number of cut CX/CZ gates; cut identities are free.
    pub fn costly_cuts(&self) -> usize {
        self.cut_kinds
            .iter()
            .filter(|k| **k != GateKind::Identity2)
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Partitions `c` for devices of `m` qubits using `ceil(n / m)` blocks.
pub fn plan_circuit(c: &Circuit, m: usize, seed: u64) -> Result<PartitionPlan> {
    let g = super::interaction_graph(c);
    let part = kway_min_cut(&g, default_block_count(c.n(), m), m, seed)?;
    PartitionPlan::from_partition(c, &part)
}

/// Same as [`plan_circuit`] but with the exhaustive oracle.
pub fn plan_circuit_exact(c: &Circuit, m: usize) -> Result<PartitionPlan> {
    let g = super::interaction_graph(c);
    let part = brute_force_min_cut(&g, default_block_count(c.n(), m), m)?;
    PartitionPlan::from_partition(c, &part)
}

/// `9^cuts` over the cut CX/CZ gates of `plan`.
pub fn sampling_overhead(plan: &PartitionPlan) -> f64 {
    9f64.powi(plan.costly_cuts() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn path4() -> WeightedGraph {
        WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    fn k4() -> WeightedGraph {
        WeightedGraph::new(4, (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v, 1.0)))).unwrap()
    }

    pub(crate) fn prism() -> WeightedGraph {
        WeightedGraph::new(
            6,
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
                (0, 3, 1.0),
                (1, 4, 1.0),
                (2, 5, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn path_splits_in_the_middle() {
        for p in [
            kway_min_cut(&path4(), 2, 2, 7).unwrap(),
            brute_force_min_cut(&path4(), 2, 2).unwrap(),
        ] {
            assert_eq!(p.blocks, vec![vec![0, 1], vec![2, 3]]);
            assert_eq!(p.cut_weight, 1.0);
        }
    }

    #[test]
    fn complete_graph_balanced_cut() {
        assert_eq!(kway_min_cut(&k4(), 2, 2, 1).unwrap().cut_weight, 4.0);
        assert_eq!(brute_force_min_cut(&k4(), 2, 2).unwrap().cut_weight, 4.0);
    }

    #[test]
    fn prism_cut() {
        assert_eq!(kway_min_cut(&prism(), 2, 3, 3).unwrap().cut_weight, 3.0);
        let bf = brute_force_min_cut(&prism(), 2, 3).unwrap();
        assert_eq!(bf.cut_weight, 3.0);
        assert_eq!(bf.blocks, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn brute_force_small_cases() {
        let empty = WeightedGraph::new(4, []).unwrap();
        assert_eq!(brute_force_min_cut(&empty, 2, 2).unwrap().cut_weight, 0.0);
        let edge = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let p = brute_force_min_cut(&edge, 2, 1).unwrap();
        assert_eq!(p.cut_weight, 1.0);
        assert_eq!(p.assignment, vec![0, 1]);
        let big = WeightedGraph::new(13, []).unwrap();
        assert!(matches!(
            brute_force_min_cut(&big, 13, 1),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn infeasible_capacity() {
        assert!(matches!(
            kway_min_cut(&path4(), 1, 3, 0),
            Err(Error::InfeasiblePartition { .. })
        ));
        assert!(matches!(
            brute_force_min_cut(&path4(), 0, 4),
            Err(Error::InfeasiblePartition { .. })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let g = prism();
        assert_eq!(
            kway_min_cut(&g, 3, 2, 11).unwrap(),
            kway_min_cut(&g, 3, 2, 11).unwrap()
        );
    }

    #[test]
    fn overhead_counts_only_entangling_cuts() {
        let c = Circuit::new(
            2,
            vec![
                Gate::two(GateKind::Cx, 0, 1),
                Gate::two(GateKind::Identity2, 0, 1),
                Gate::two(GateKind::Cz, 1, 0),
            ],
            0,
        )
        .unwrap();
        let plan = PartitionPlan::from_blocks(&c, vec![vec![0], vec![1]], 1).unwrap();
        assert_eq!(plan.cut_gates, vec![0, 1, 2]);
        assert_eq!(sampling_overhead(&plan), 81.0);
        let whole = PartitionPlan::from_blocks(&c, vec![vec![0, 1]], 2).unwrap();
        assert_eq!(sampling_overhead(&whole), 1.0);
    }

    #[test]
    fn overhead_powers_of_nine() {
        for cuts in 0..5usize {
            let gates = (0..cuts).map(|_| Gate::two(GateKind::Cz, 0, 1)).collect();
            let c = Circuit::new(2, gates, 0).unwrap();
            let plan = PartitionPlan::from_blocks(&c, vec![vec![0], vec![1]], 1).unwrap();
            assert_eq!(sampling_overhead(&plan), 9f64.powi(cuts as i32));
        }
    }

    #[test]
    fn plan_validation() {
        let c = Circuit::new(3, vec![], 0).unwrap();
        assert!(PartitionPlan::from_blocks(&c, vec![vec![0, 1], vec![1, 2]], 2).is_err());
        assert!(PartitionPlan::from_blocks(&c, vec![vec![0, 1]], 2).is_err());
        assert!(PartitionPlan::from_blocks(&c, vec![vec![0, 1, 2]], 2).is_err());
    }
}
