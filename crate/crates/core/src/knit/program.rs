use std::collections::{BTreeMap, BTreeSet};

use super::partition::PartitionPlan;
use super::qpd::{one_norm, qpd_terms, QpdTerm};
use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};

/// Which operand of a cut gate a fragment holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// First operand (the control of a CX).
    A,
    /// Second operand.
    B,
}

/// A local operation slot inside a fragment: applied before fragment gate `location`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Insertion {
    pub location: usize,
    pub cut: usize,
    pub side: Side,
    /// Local qubit index within the fragment.
    pub qubit: usize,
}

/// The restriction of the circuit to one block.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    /// Global qubits of the block, ascending; local qubit `i` is `qubits[i]`.
    pub qubits: Vec<usize>,
    /// Intra-block gates in original order, on local qubits, referencing the original slots.
    pub circuit: Circuit,
    /// Original position of each fragment gate.
    pub origins: Vec<usize>,
    /// Cut insertion points in execution order.
    pub insertions: Vec<Insertion>,
}

impl Fragment {
    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    pub fn slots(&self) -> BTreeSet<usize> {
        self.circuit
            .gates()
            .iter()
            .filter_map(|g| g.slot())
            .collect()
    }
}

/// Where a cut gate lands on each side: `(fragment, location)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutPoint {
    pub gate: usize,
    pub kind: GateKind,
    pub a: (usize, usize),
    pub b: (usize, usize),
}

/// Fragments plus the quasiprobability term table that knits them back together.
#[derive(Debug, Clone)]
pub struct KnitProgram {
    n: usize,
    num_params: usize,
    plan: PartitionPlan,
    fragments: Vec<Fragment>,
    cut_points: Vec<CutPoint>,
    term_table: Vec<Vec<QpdTerm>>,
    param_map: BTreeMap<usize, BTreeSet<usize>>,
    /// Original gate position to `(fragment, local gate index)`; `None` for cut gates.
    gate_locations: Vec<Option<(usize, usize)>>,
}

/// Splits `c` along `plan`, replacing every cut gate by an insertion point on each side.
pub fn cut_circuit(c: &Circuit, plan: &PartitionPlan) -> Result<KnitProgram> {
    // Re-derives the cut set so a stale plan cannot disagree with the circuit.
    let plan = PartitionPlan::from_blocks(c, plan.blocks.clone(), plan.capacity)?;
    let owner = plan.owners();
    let mut local = vec![0usize; c.n()];
    for block in &plan.blocks {
        for (i, &q) in block.iter().enumerate() {
            local[q] = i;
        }
    }
    let nf = plan.blocks.len();
    let mut gates: Vec<Vec<crate::circuit::Gate>> = vec![Vec::new(); nf];
    let mut origins: Vec<Vec<usize>> = vec![Vec::new(); nf];
    let mut insertions: Vec<Vec<Insertion>> = vec![Vec::new(); nf];
    let mut cut_points = Vec::new();
    let mut term_table = Vec::new();
    let mut gate_locations = vec![None; c.gates().len()];

    for (pos, g) in c.gates().iter().enumerate() {
        let qs = g.qubits();
        let f = owner[qs[0]];
        if g.kind.arity() == 2 && owner[qs[1]] != f {
            let terms = qpd_terms(g.kind).map_err(|_| Error::UnsupportedCut {
                kind: g.kind.to_string(),
                position: pos,
            })?;
            let cut = cut_points.len();
            let fb = owner[qs[1]];
            let a = (f, gates[f].len());
            let b = (fb, gates[fb].len());
            insertions[f].push(Insertion {
                location: a.1,
                cut,
                side: Side::A,
                qubit: local[qs[0]],
            });
            insertions[fb].push(Insertion {
                location: b.1,
                cut,
                side: Side::B,
                qubit: local[qs[1]],
            });
            cut_points.push(CutPoint {
                gate: pos,
                kind: g.kind,
                a,
                b,
            });
            term_table.push(terms);
        } else {
            gate_locations[pos] = Some((f, gates[f].len()));
            gates[f].push(g.remapped(|q| local[q]));
            origins[f].push(pos);
        }
    }

    let mut fragments = Vec::with_capacity(nf);
    let mut param_map: BTreeMap<usize, BTreeSet<usize>> =
        (0..c.num_params()).map(|s| (s, BTreeSet::new())).collect();
    for (f, ((gs, orig), ins)) in gates.into_iter().zip(origins).zip(insertions).enumerate() {
        let circuit = Circuit::new(plan.blocks[f].len(), gs, c.num_params())?;
        for s in circuit.gates().iter().filter_map(|g| g.slot()) {
            param_map.entry(s).or_default().insert(f);
        }
        fragments.push(Fragment {
            qubits: plan.blocks[f].clone(),
            circuit,
            origins: orig,
            insertions: ins,
        });
    }
    Ok(KnitProgram {
        n: c.n(),
        num_params: c.num_params(),
        plan,
        fragments,
        cut_points,
        term_table,
        param_map,
        gate_locations,
    })
}

impl KnitProgram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn plan(&self) -> &PartitionPlan {
        &self.plan
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn fragment_count(&self) -> usize {
        self.fragments.len()
    }

    pub fn cut_points(&self) -> &[CutPoint] {
        &self.cut_points
    }

    pub fn term_table(&self) -> &[Vec<QpdTerm>] {
        &self.term_table
    }

    /// Slot to the fragments containing it. Every slot of the original circuit has an entry
    /// (possibly empty when the slot is unused).
    pub fn param_map(&self) -> &BTreeMap<usize, BTreeSet<usize>> {
        &self.param_map
    }

    /// `prod over cuts of sum_i |p_i|`.
    pub fn one_norm(&self) -> f64 {
        self.term_table.iter().map(|t| one_norm(t)).product()
    }

    /// Number of term combinations an exact reconstruction enumerates.
    pub fn combination_count(&self) -> usize {
        self.term_table.iter().map(Vec::len).product()
    }

    /// `(fragment, local gate index)` of an uncut original gate.
    pub fn locate(&self, original_position: usize) -> Option<(usize, usize)> {
        self.gate_locations
            .get(original_position)
            .copied()
            .flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Angle, Gate};

    #[test]
    fn uncut_program_is_per_block_restriction() {
        let c = Circuit::new(
            4,
            vec![
                Gate::rotation(GateKind::Rx, 0, Angle::Slot(0)),
                Gate::two(GateKind::Cx, 0, 1),
                Gate::rotation(GateKind::Ry, 3, Angle::Slot(1)),
                Gate::two(GateKind::Cz, 2, 3),
            ],
            2,
        )
        .unwrap();
        let plan = PartitionPlan::from_blocks(&c, vec![vec![0, 1], vec![2, 3]], 2).unwrap();
        let prog = cut_circuit(&c, &plan).unwrap();
        assert!(prog.term_table().is_empty());
        assert_eq!(prog.fragment_count(), 2);
        assert_eq!(prog.fragments()[1].circuit.gates()[0].qubits(), &[1]);
        assert_eq!(prog.fragments()[1].origins, vec![2, 3]);
        assert_eq!(prog.param_map()[&0], BTreeSet::from([0]));
        assert_eq!(prog.param_map()[&1], BTreeSet::from([1]));
        assert_eq!(prog.combination_count(), 1);
    }

    #[test]
    fn bell_cut_structure() {
        let c = Circuit::new(
            2,
            vec![Gate::single(GateKind::H, 0), Gate::two(GateKind::Cx, 0, 1)],
            0,
        )
        .unwrap();
        let plan = PartitionPlan::from_blocks(&c, vec![vec![0], vec![1]], 1).unwrap();
        let prog = cut_circuit(&c, &plan).unwrap();
        assert_eq!(prog.fragments().len(), 2);
        assert!(prog.fragments().iter().all(|f| f.width() == 1));
        assert_eq!(prog.cut_points().len(), 1);
        assert_eq!(prog.term_table()[0].len(), 6);
        assert_eq!(prog.cut_points()[0].a, (0, 1));
        assert_eq!(prog.cut_points()[0].b, (1, 0));
        assert_eq!(prog.one_norm(), 3.0);
    }

    #[test]
    fn two_cuts_give_36_combinations() {
        let c = Circuit::new(
            2,
            vec![Gate::two(GateKind::Cz, 0, 1), Gate::two(GateKind::Cx, 1, 0)],
            0,
        )
        .unwrap();
        let plan = PartitionPlan::from_blocks(&c, vec![vec![0], vec![1]], 1).unwrap();
        let prog = cut_circuit(&c, &plan).unwrap();
        assert_eq!(prog.combination_count(), 36);
        // The reversed CX holds its control on fragment 1.
        assert_eq!(prog.cut_points()[1].a.0, 1);
    }

    #[test]
    fn param_map_matches_parameter_table() {
        let c = Circuit::new(
            3,
            vec![
                Gate::rotation(GateKind::Rx, 0, Angle::Slot(0)),
                Gate::rotation(GateKind::Rx, 2, Angle::Slot(0)),
                Gate::two(GateKind::Cz, 1, 2),
                Gate::rotation(GateKind::Rz, 1, Angle::Slot(1)),
            ],
            3,
        )
        .unwrap();
        let plan = PartitionPlan::from_blocks(&c, vec![vec![0, 1], vec![2]], 2).unwrap();
        let prog = cut_circuit(&c, &plan).unwrap();
        let table = c.parameter_table();
        for (slot, positions) in table {
            let frags: BTreeSet<usize> = positions
                .iter()
                .map(|&p| prog.locate(p).unwrap().0)
                .collect();
            assert_eq!(prog.param_map()[&slot], frags);
        }
    }

    #[test]
    fn unsupported_cut() {
        // A plan built for a different circuit cannot smuggle in an uncuttable gate, but a
        // cut on an unsupported kind is reported with its position.
        let err = qpd_terms(GateKind::H).unwrap_err();
        assert!(matches!(err, Error::InvalidGate(_)));
    }
}
