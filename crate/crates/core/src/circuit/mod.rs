//! Parameterized circuit representation shared by every other module.
//!
//! Circuits are immutable once built. Rotation gates reference parameter slots,
//! and several gates may share one slot.

mod ansatz;
mod gate;
mod observable;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use ansatz::{build_ansatz, qaoa_template, AnsatzSpec, Layer, Placement};
pub use gate::{Angle, BoundGate, Gate, GateKind};
pub use observable::{Observable, Pauli, PauliString, PauliTerm};

use crate::error::{Error, Result};

/// Ordered gate list over `n` qubits with `num_params` parameter slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    num_params: usize,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>, num_params: usize) -> Result<Self> {
        for g in &gates {
            for &q in g.qubits() {
                if q >= n {
                    return Err(Error::QubitOutOfRange { qubit: q, n });
                }
            }
            if let Some(slot) = g.slot() {
                if slot >= num_params {
                    return Err(Error::SlotOutOfRange { slot, num_params });
                }
            }
        }
        Ok(Circuit {
            n,
            gates,
            num_params,
        })
    }

    /// Builds a circuit whose parameter count is one past the largest slot used.
    pub fn with_inferred_params(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let num_params = gates
            .iter()
            .filter_map(Gate::slot)
            .map(|s| s + 1)
            .max()
            .unwrap_or(0);
        Circuit::new(n, gates, num_params)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn bind(&self, theta: &[f64]) -> Result<BoundCircuit> {
        self.bind_shifted(theta, None)
    }

    /// Binds `theta`, adding `delta` to the angle of the single gate at `position`.
    pub fn bind_shifted(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Result<BoundCircuit> {
        if theta.len() != self.num_params {
            return Err(Error::ParameterLength {
                expected: self.num_params,
                got: theta.len(),
            });
        }
        let gates = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let mut angle = match g.angle {
                    None => 0.0,
                    Some(Angle::Fixed(v)) => v,
                    Some(Angle::Slot(s)) => theta[s],
                };
                if let Some((pos, delta)) = shift {
                    if pos == i {
                        angle += delta;
                    }
                }
                BoundGate::from_gate(g, angle)
            })
            .collect();
        Ok(BoundCircuit { n: self.n, gates })
    }

    /// Slot index to the ascending gate positions that reference it. Every slot has an entry.
    pub fn parameter_table(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut table: BTreeMap<usize, Vec<usize>> =
            (0..self.num_params).map(|s| (s, Vec::new())).collect();
        for (pos, g) in self.gates.iter().enumerate() {
            if let Some(s) = g.slot() {
                table.entry(s).or_default().push(pos);
            }
        }
        table
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == 2).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A circuit with every angle resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCircuit {
    n: usize,
    gates: Vec<BoundGate>,
}

impl BoundCircuit {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[BoundGate] {
        &self.gates
    }
}

impl TryFrom<&Circuit> for BoundCircuit {
    type Error = Error;

    /// Succeeds only for circuits without parameter slots.
    fn try_from(c: &Circuit) -> Result<Self> {
        if let Some(slot) = c.gates.iter().find_map(Gate::slot) {
            return Err(Error::UnboundParameter(slot));
        }
        c.bind_shifted(&vec![0.0; c.num_params], None)
    }
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    kind: GateKind,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slot: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct CircuitRepr {
    n: usize,
    gates: Vec<GateRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    num_params: Option<usize>,
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let gates = self
            .gates
            .iter()
            .map(|g| GateRepr {
                kind: g.kind,
                qubits: g.qubits().to_vec(),
                angle: match g.angle {
                    Some(Angle::Fixed(v)) => Some(v),
                    _ => None,
                },
                slot: g.slot(),
            })
            .collect();
        CircuitRepr {
            n: self.n,
            gates,
            num_params: Some(self.num_params),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = CircuitRepr::deserialize(d)?;
        let mut gates = Vec::with_capacity(repr.gates.len());
        for g in repr.gates {
            let angle = match (g.angle, g.slot) {
                (Some(_), Some(_)) => return Err(D::Error::custom("gate has both angle and slot")),
                (Some(v), None) => Some(Angle::Fixed(v)),
                (None, Some(s)) => Some(Angle::Slot(s)),
                (None, None) => None,
            };
            gates.push(Gate::new(g.kind, &g.qubits, angle).map_err(D::Error::custom)?);
        }
        let result = match repr.num_params {
            Some(p) => Circuit::new(repr.n, gates, p),
            None => Circuit::with_inferred_params(repr.n, gates),
        };
        result.map_err(D::Error::custom)
    }
}
