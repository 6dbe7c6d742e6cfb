use serde::{Deserialize, Serialize};

use super::{Angle, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::knit::WeightedGraph;

/// A two-qubit gate placed on an ordered qubit pair (`control` first for CX).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub kind: GateKind,
    pub control: usize,
    pub target: usize,
}

/// One ansatz block: a single-qubit gate per qubit, then the two-qubit placements in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Layer {
    pub rotations: Vec<GateKind>,
    pub placements: Vec<Placement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub layers: Vec<Layer>,
}

impl AnsatzSpec {
    pub fn new(layers: Vec<Layer>) -> Self {
        AnsatzSpec { layers }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Number of CX/CZ placements (identity placements excluded).
    pub fn entangler_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| &l.placements)
            .filter(|p| p.kind != GateKind::Identity2)
            .count()
    }
}

/// Expands `spec` into a circuit on `n` qubits.
///
/// Each layer emits its single-qubit row first, then its placements. Every rotation gets a
/// fresh parameter slot. `IDENTITY2` placements are no-ops and emit nothing.
pub fn build_ansatz(spec: &AnsatzSpec, n: usize) -> Result<Circuit> {
    if spec.layers.is_empty() {
        return Err(Error::EmptyAnsatz);
    }
    let mut gates = Vec::new();
    let mut slot = 0;
    for layer in &spec.layers {
        if layer.rotations.len() > n {
            return Err(Error::QubitOutOfRange {
                qubit: layer.rotations.len() - 1,
                n,
            });
        }
        if layer.rotations.len() < n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: layer.rotations.len(),
            });
        }
        for (q, &kind) in layer.rotations.iter().enumerate() {
            if kind.arity() != 1 {
                return Err(Error::InvalidGate(format!(
                    "{kind} is not a single-qubit gate"
                )));
            }
            if kind.is_rotation() {
                gates.push(Gate::rotation(kind, q, Angle::Slot(slot)));
                slot += 1;
            } else {
                gates.push(Gate::single(kind, q));
            }
        }
        for p in &layer.placements {
            for q in [p.control, p.target] {
                if q >= n {
                    return Err(Error::QubitOutOfRange { qubit: q, n });
                }
            }
            if p.kind.arity() != 2 {
                return Err(Error::InvalidGate(format!(
                    "{} is not a two-qubit gate",
                    p.kind
                )));
            }
            if p.control == p.target {
                return Err(Error::InvalidGate(format!(
                    "{} placement on a single qubit",
                    p.kind
                )));
            }
            if p.kind != GateKind::Identity2 {
                gates.push(Gate::two(p.kind, p.control, p.target));
            }
        }
    }
    Circuit::new(n, gates, slot)
}

/// Problem-inspired QAOA circuit with one shared (gamma, beta) slot pair per layer.
///
/// Slot `2l` is the cost angle of layer `l` and slot `2l + 1` its mixer angle. Each edge
/// contributes `CX(u,v) RZ(v, gamma) CX(u,v)`, i.e. `exp(-i gamma Z_u Z_v / 2)`, so the
/// template requires unit edge weights.
pub fn qaoa_template(graph: &WeightedGraph, layers: usize) -> Result<Circuit> {
    if layers == 0 {
        return Err(Error::EmptyAnsatz);
    }
    if let Some(e) = graph.edges().iter().find(|e| e.weight != 1.0) {
        return Err(Error::InvalidGraph(format!(
            "QAOA template needs unit weights, edge ({}, {}) has {}",
            e.u, e.v, e.weight
        )));
    }
    let n = graph.nodes();
    let mut gates: Vec<Gate> = (0..n).map(|q| Gate::single(GateKind::H, q)).collect();
    for l in 0..layers {
        for e in graph.edges() {
            gates.push(Gate::two(GateKind::Cx, e.u, e.v));
            gates.push(Gate::rotation(GateKind::Rz, e.v, Angle::Slot(2 * l)));
            gates.push(Gate::two(GateKind::Cx, e.u, e.v));
        }
        gates.extend((0..n).map(|q| Gate::rotation(GateKind::Rx, q, Angle::Slot(2 * l + 1))));
    }
    Circuit::new(n, gates, 2 * layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(rot: GateKind, n: usize, placements: Vec<Placement>) -> Layer {
        Layer {
            rotations: vec![rot; n],
            placements,
        }
    }

    #[test]
    fn single_layer_rotations() {
        let spec = AnsatzSpec::new(vec![layer(GateKind::Rx, 2, vec![])]);
        let c = build_ansatz(&spec, 2).unwrap();
        assert_eq!(c.gates().len(), 2);
        assert_eq!(c.num_params(), 2);
    }

    #[test]
    fn rotation_row_precedes_placements() {
        let spec = AnsatzSpec::new(vec![layer(
            GateKind::Ry,
            2,
            vec![Placement {
                kind: GateKind::Cx,
                control: 0,
                target: 1,
            }],
        )]);
        let c = build_ansatz(&spec, 2).unwrap();
        assert_eq!(c.gates().len(), 3);
        assert_eq!(c.num_params(), 2);
        assert_eq!(c.gates()[2].kind, GateKind::Cx);
    }

    #[test]
    fn six_qubit_three_layer_count() {
        // Linear chain of alternating CX / CZ / identity placements on every layer.
        let placements: Vec<Placement> = (0..5)
            .map(|i| Placement {
                kind: GateKind::TWO_QUBIT[i % 3],
                control: i,
                target: i + 1,
            })
            .collect();
        let spec = AnsatzSpec::new(vec![layer(GateKind::Ry, 6, placements); 3]);
        let c = build_ansatz(&spec, 6).unwrap();
        // 18 rotation slots; per layer the identity placements (i = 2) emit nothing.
        let expected_two = 3 * (0..5).filter(|i| i % 3 != 2).count();
        assert_eq!(c.num_params(), 18);
        assert_eq!(c.two_qubit_gate_count(), expected_two);
        assert_eq!(c.gates().len(), 18 + expected_two);
        assert_eq!(spec.entangler_count(), expected_two);
    }

    #[test]
    fn expansion_is_deterministic() {
        let spec = AnsatzSpec::new(vec![
            layer(
                GateKind::Rz,
                3,
                vec![Placement {
                    kind: GateKind::Cz,
                    control: 1,
                    target: 2,
                }],
            ),
            layer(GateKind::Rx, 3, vec![]),
        ]);
        assert_eq!(
            build_ansatz(&spec, 3).unwrap(),
            build_ansatz(&spec, 3).unwrap()
        );
    }

    #[test]
    fn errors() {
        assert_eq!(
            build_ansatz(&AnsatzSpec::new(vec![]), 2),
            Err(Error::EmptyAnsatz)
        );
        let bad = AnsatzSpec::new(vec![layer(
            GateKind::Rx,
            2,
            vec![Placement {
                kind: GateKind::Cx,
                control: 0,
                target: 5,
            }],
        )]);
        assert_eq!(
            build_ansatz(&bad, 2),
            Err(Error::QubitOutOfRange { qubit: 5, n: 2 })
        );
        let wide = AnsatzSpec::new(vec![layer(GateKind::Rx, 3, vec![])]);
        assert!(matches!(
            build_ansatz(&wide, 2),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn qaoa_template_shares_slots() {
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let c = qaoa_template(&g, 2).unwrap();
        assert_eq!(c.num_params(), 4);
        let table = c.parameter_table();
        assert_eq!(table[&0].len(), 2);
        assert_eq!(table[&1].len(), 3);
        let weighted = WeightedGraph::new(2, vec![(0, 1, 2.0)]).unwrap();
        assert!(qaoa_template(&weighted, 1).is_err());
    }
}
