use std::fmt;

use serde::{Deserialize, Serialize};

/// The supported gate alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "RX")]
    Rx,
    #[serde(rename = "RY")]
    Ry,
    #[serde(rename = "RZ")]
    Rz,
    H,
    X,
    Y,
    Z,
    S,
    #[serde(rename = "CX")]
    Cx,
    #[serde(rename = "CZ")]
    Cz,
    #[serde(rename = "IDENTITY2")]
    Identity2,
}

impl GateKind {
    pub const SINGLE_ROTATIONS: [GateKind; 3] = [GateKind::Rx, GateKind::Ry, GateKind::Rz];
    pub const TWO_QUBIT: [GateKind; 3] = [GateKind::Cx, GateKind::Cz, GateKind::Identity2];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Identity2 => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::Cx => "CX",
            GateKind::Cz => "CZ",
            GateKind::Identity2 => "IDENTITY2",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rotation angle: either a literal value in radians or a reference to a parameter slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Slot(usize),
}

/// A gate instance. Single-qubit gates repeat their qubit in `qubits[1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    qubits: [usize; 2],
    pub angle: Option<Angle>,
}

impl Gate {
    pub fn single(kind: GateKind, qubit: usize) -> Self {
        debug_assert!(kind.arity() == 1 && !kind.is_rotation());
        Gate {
            kind,
            qubits: [qubit, qubit],
            angle: None,
        }
    }

    pub fn rotation(kind: GateKind, qubit: usize, angle: Angle) -> Self {
        debug_assert!(kind.is_rotation());
        Gate {
            kind,
            qubits: [qubit, qubit],
            angle: Some(angle),
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        debug_assert!(kind.arity() == 2);
        Gate {
            kind,
            qubits: [a, b],
            angle: None,
        }
    }

    /// Builds a gate from loose parts, checking arity, angle presence and operand distinctness.
    pub fn new(kind: GateKind, qubits: &[usize], angle: Option<Angle>) -> Result<Self, String> {
        if qubits.len() != kind.arity() {
            return Err(format!(
                "{kind} takes {} qubit(s), got {}",
                kind.arity(),
                qubits.len()
            ));
        }
        if kind.is_rotation() != angle.is_some() {
            return Err(if kind.is_rotation() {
                format!("{kind} requires an angle")
            } else {
                format!("{kind} does not take an angle")
            });
        }
        if let Some(Angle::Fixed(v)) = angle {
            if !v.is_finite() {
                return Err(format!("{kind} angle must be finite"));
            }
        }
        let qs = if kind.arity() == 2 {
            if qubits[0] == qubits[1] {
                return Err(format!("{kind} operands must be distinct"));
            }
            [qubits[0], qubits[1]]
        } else {
            [qubits[0], qubits[0]]
        };
        Ok(Gate {
            kind,
            qubits: qs,
            angle,
        })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn slot(&self) -> Option<usize> {
        match self.angle {
            Some(Angle::Slot(s)) => Some(s),
            _ => None,
        }
    }

    /// Same gate acting on remapped qubits.
    pub(crate) fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind,
            qubits: [map(self.qubits[0]), map(self.qubits[1])],
            angle: self.angle,
        }
    }
}

/// A gate whose angle (if any) is a concrete value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundGate {
    pub kind: GateKind,
    qubits: [usize; 2],
    pub angle: f64,
}

impl BoundGate {
    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub(crate) fn from_gate(g: &Gate, angle: f64) -> Self {
        BoundGate {
            kind: g.kind,
            qubits: g.qubits,
            angle,
        }
    }
}
