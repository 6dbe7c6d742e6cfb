//! Quasiprobability decompositions of the cuttable two-qubit gates into local operations.
//!
//! For CZ, writing `CZ ~ (S x S) exp(i pi/4 Z x Z)` and expanding the commutator part of the
//! `ZZ` rotation in terms of signed Z measurements and `exp(+-i pi/4 Z)` rotations gives six
//! product terms of weight 1/2, so the one-norm per cut is 3:
//!
//! ```text
//! CZ(rho) = 1/2 (S,S) + 1/2 (Sdg,Sdg) + 1/2 (M,I) - 1/2 (M,Z) + 1/2 (I,M) - 1/2 (Z,M)
//! ```
//!
//! where `M(rho) = P0 rho P0 - P1 rho P1` is a Z-basis measurement with its outcome folded in
//! as a sign. CX is CZ conjugated by H on the target side.

use crate::circuit::GateKind;
use crate::error::{Error, Result};
use crate::sim::kernels::{
    mat2_mul, Mat2, HADAMARD, IDENTITY, PAULI_Z, PHASE_S, PHASE_SDG, PROJ_0, PROJ_1,
};

/// A signed sum of single-Kraus branches: `rho -> sum_b sign_b K_b rho K_b^dagger`.
///
/// Each branch is completely positive and the Kraus operators satisfy `sum K^dagger K <= I`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOp {
    pub label: &'static str,
    pub branches: Vec<(Mat2, f64)>,
}

impl LocalOp {
    fn unitary(label: &'static str, u: Mat2) -> Self {
        LocalOp {
            label,
            branches: vec![(u, 1.0)],
        }
    }

    fn signed_z_measurement() -> Self {
        LocalOp {
            label: "M",
            branches: vec![(PROJ_0, 1.0), (PROJ_1, -1.0)],
        }
    }

    /// Conjugates every Kraus operator by `u` (`K -> u K u^dagger` for Hermitian `u`).
    fn conjugated(&self, u: &Mat2) -> Self {
        LocalOp {
            label: self.label,
            branches: self
                .branches
                .iter()
                .map(|(k, s)| (mat2_mul(&mat2_mul(u, k), u), *s))
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.branches.len() == 1 && self.branches[0] == (IDENTITY, 1.0)
    }
}

/// One term `p_i (op_a x op_b)`; `op_a` acts on the gate's first operand.
#[derive(Debug, Clone, PartialEq)]
pub struct QpdTerm {
    pub coefficient: f64,
    pub op_a: LocalOp,
    pub op_b: LocalOp,
}

/// Sum of `|p_i|`.
pub fn one_norm(terms: &[QpdTerm]) -> f64 {
    terms.iter().map(|t| t.coefficient.abs()).sum()
}

fn cz_terms() -> Vec<QpdTerm> {
    let id = || LocalOp::unitary("I", IDENTITY);
    let z = || LocalOp::unitary("Z", PAULI_Z);
    let m = LocalOp::signed_z_measurement;
    vec![
        QpdTerm {
            coefficient: 0.5,
            op_a: LocalOp::unitary("S", PHASE_S),
            op_b: LocalOp::unitary("S", PHASE_S),
        },
        QpdTerm {
            coefficient: 0.5,
            op_a: LocalOp::unitary("Sdg", PHASE_SDG),
            op_b: LocalOp::unitary("Sdg", PHASE_SDG),
        },
        QpdTerm {
            coefficient: 0.5,
            op_a: m(),
            op_b: id(),
        },
        QpdTerm {
            coefficient: -0.5,
            op_a: m(),
            op_b: z(),
        },
        QpdTerm {
            coefficient: 0.5,
            op_a: id(),
            op_b: m(),
        },
        QpdTerm {
            coefficient: -0.5,
            op_a: z(),
            op_b: m(),
        },
    ]
}

/// Decomposition of a cuttable gate kind.
pub fn qpd_terms(kind: GateKind) -> Result<Vec<QpdTerm>> {
    match kind {
        GateKind::Identity2 => Ok(vec![QpdTerm {
            coefficient: 1.0,
            op_a: LocalOp::unitary("I", IDENTITY),
            op_b: LocalOp::unitary("I", IDENTITY),
        }]),
        GateKind::Cz => Ok(cz_terms()),
        GateKind::Cx => Ok(cz_terms()
            .into_iter()
            .map(|t| QpdTerm {
                op_b: t.op_b.conjugated(&HADAMARD),
                ..t
            })
            .collect()),
        other => Err(Error::InvalidGate(format!(
            "{other} has no gate-cut decomposition"
        ))),
    }
}
