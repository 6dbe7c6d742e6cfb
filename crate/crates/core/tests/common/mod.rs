#![allow(dead_code)]

use std::f64::consts::PI;

use knitvqa::circuit::{Angle, Circuit, Gate, GateKind, Observable};
use knitvqa::knit::PartitionPlan;
use rand::seq::SliceRandom;
use rand::Rng;

const ONE_QUBIT: [GateKind; 7] = [
    GateKind::H,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::S,
    GateKind::Rx,
    GateKind::Rz,
];
const ROTATIONS: [GateKind; 3] = [GateKind::Rx, GateKind::Ry, GateKind::Rz];

/// Random non-empty blocks covering `0..n`, at least two of them when `n >= 2`.
pub fn random_blocks(n: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let k = if n < 2 {
        1
    } else {
        rng.gen_range(2..=n.min(4))
    };
    let mut qubits: Vec<usize> = (0..n).collect();
    qubits.shuffle(rng);
    let mut blocks: Vec<Vec<usize>> = qubits[..k].iter().map(|&q| vec![q]).collect();
    for &q in &qubits[k..] {
        let b = rng.gen_range(0..k);
        blocks[b].push(q);
    }
    blocks
}

/// A random parameterized circuit with at most `max_cuts` two-qubit gates across `blocks`.
/// Slots are shared between gates with probability about one half.
pub fn random_circuit(
    n: usize,
    blocks: &[Vec<usize>],
    max_cuts: usize,
    rng: &mut impl Rng,
) -> Circuit {
    let mut owner = vec![0; n];
    for (b, block) in blocks.iter().enumerate() {
        for &q in block {
            owner[q] = b;
        }
    }
    let num_params = rng.gen_range(1..=6);
    let len = rng.gen_range(8..=28);
    let cut_budget = rng.gen_range(0..=max_cuts);
    let mut cuts = 0;
    let mut gates = Vec::with_capacity(len);
    while gates.len() < len {
        match rng.gen_range(0..10) {
            0..=3 => {
                let kind = *ROTATIONS.choose(rng).unwrap();
                let q = rng.gen_range(0..n);
                let angle = if rng.gen_bool(0.8) {
                    Angle::Slot(rng.gen_range(0..num_params))
                } else {
                    Angle::Fixed(rng.gen_range(-PI..PI))
                };
                gates.push(Gate::rotation(kind, q, angle));
            }
            4..=5 => {
                let kind = *ONE_QUBIT.choose(rng).unwrap();
                let q = rng.gen_range(0..n);
                if kind.is_rotation() {
                    gates.push(Gate::rotation(
                        kind,
                        q,
                        Angle::Fixed(rng.gen_range(-PI..PI)),
                    ));
                } else {
                    gates.push(Gate::single(kind, q));
                }
            }
            _ if n >= 2 => {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                let crossing = owner[a] != owner[b];
                if crossing && cuts >= cut_budget {
                    continue;
                }
                cuts += crossing as usize;
                let kind = if rng.gen_bool(0.5) {
                    GateKind::Cx
                } else {
                    GateKind::Cz
                };
                gates.push(Gate::two(kind, a, b));
            }
            _ => {}
        }
    }
    Circuit::new(n, gates, num_params).unwrap()
}

pub fn random_observable(n: usize, rng: &mut impl Rng) -> Observable {
    let terms = rng.gen_range(1..=5);
    let mut text = String::new();
    for _ in 0..terms {
        let s: String = (0..n)
            .map(|_| *['I', 'X', 'Y', 'Z'].choose(rng).unwrap())
            .collect();
        text.push_str(&format!("{} {}\n", rng.gen_range(-1.0..1.0), s));
    }
    Observable::parse(&text).unwrap()
}

pub fn random_theta(p: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..p).map(|_| rng.gen_range(-PI..PI)).collect()
}

pub fn plan(c: &Circuit, blocks: Vec<Vec<usize>>) -> PartitionPlan {
    let cap = blocks.iter().map(Vec::len).max().unwrap();
    PartitionPlan::from_blocks(c, blocks, cap).unwrap()
}
