use super::kernels::{
    apply_1q, apply_2q, gate_matrix, mat2_conj, mat4_conj, pauli_trace, GateMatrix, Mat2,
    PauliMasks, C64,
};
use super::noise::NoiseChannel;
use super::statevector::StateVector;
use crate::circuit::{BoundCircuit, BoundGate, Observable};
use crate::error::{Error, Result};

/// Largest register the dense density-matrix backend accepts.
pub const MAX_DENSITY_QUBITS: usize = 10;

/// Row-major `2^n x 2^n` density operator. Traces below one are allowed so that
/// trace-non-increasing maps can be represented.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        data[0] = C64::new(1.0, 0.0);
        DensityMatrix { n, data }
    }

    pub fn from_statevector(s: &StateVector) -> Self {
        let a = s.amplitudes();
        let data = a
            .iter()
            .flat_map(|r| a.iter().map(move |c| r * c.conj()))
            .collect();
        DensityMatrix { n: s.n(), data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: obs.n(),
            });
        }
        Ok(observable_on_density(&self.data, self.dim(), obs))
    }

    /// Single-qubit reduced state of `qubit`.
    pub fn marginal(&self, qubit: usize) -> Mat2 {
        let dim = self.dim();
        let bit = 1usize << (self.n - 1 - qubit);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for r in 0..dim {
            for c in 0..dim {
                if (r & !bit) == (c & !bit) {
                    out[usize::from(r & bit != 0)][usize::from(c & bit != 0)] += self.get(r, c);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let dim = self.dim();
        let rows: Vec<Vec<[f64; 2]>> = (0..dim)
            .map(|r| {
                (0..dim)
                    .map(|c| [self.get(r, c).re, self.get(r, c).im])
                    .collect()
            })
            .collect();
        serde_json::json!({ "n": self.n, "entries": rows }).to_string()
    }
}

pub(crate) fn observable_on_density(rho: &[C64], dim: usize, obs: &Observable) -> f64 {
    let total: C64 = obs
        .terms()
        .iter()
        .map(|t| pauli_trace(rho, dim, &PauliMasks::new(&t.pauli)) * t.coeff)
        .sum();
    total.re
}

/// `rho -> K rho K^dagger` on one qubit of an `n`-qubit vectorized density matrix.
pub(crate) fn conjugate_1q(rho: &mut [C64], n: usize, qubit: usize, k: &Mat2) {
    let row_bit = n + (n - 1 - qubit);
    let col_bit = n - 1 - qubit;
    apply_1q(rho, row_bit, k);
    apply_1q(rho, col_bit, &mat2_conj(k));
}

pub(crate) fn apply_gate_density(rho: &mut [C64], n: usize, gate: &BoundGate) {
    let q = gate.qubits();
    match gate_matrix(gate.kind, gate.angle) {
        GateMatrix::One(m) => conjugate_1q(rho, n, q[0], &m),
        GateMatrix::Two(m) => {
            apply_2q(rho, n + (n - 1 - q[0]), n + (n - 1 - q[1]), &m);
            apply_2q(rho, n - 1 - q[0], n - 1 - q[1], &mat4_conj(&m));
        }
    }
}

/// `rho -> sum_k sign_k K_k rho K_k^dagger` on one qubit.
pub(crate) fn apply_signed_kraus(
    rho: &mut Vec<C64>,
    n: usize,
    qubit: usize,
    branches: &[(Mat2, f64)],
) {
    if let [(k, sign)] = branches {
        conjugate_1q(rho, n, qubit, k);
        if *sign != 1.0 {
            rho.iter_mut().for_each(|v| *v *= *sign);
        }
        return;
    }
    let mut acc = vec![C64::new(0.0, 0.0); rho.len()];
    for (k, sign) in branches {
        let mut branch = rho.clone();
        conjugate_1q(&mut branch, n, qubit, k);
        acc.iter_mut()
            .zip(&branch)
            .for_each(|(a, b)| *a += b * *sign);
    }
    *rho = acc;
}

pub(crate) fn apply_noise(rho: &mut Vec<C64>, n: usize, qubit: usize, noise: &NoiseChannel) {
    let branches: Vec<(Mat2, f64)> = noise.kraus().iter().map(|k| (*k, 1.0)).collect();
    apply_signed_kraus(rho, n, qubit, &branches);
}

/// Runs `c` on `|0...0><0...0|`, applying `noise` after each gate on each of its qubits.
pub fn run_density(c: &BoundCircuit, noise: Option<&NoiseChannel>) -> Result<DensityMatrix> {
    let n = c.n();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::CapacityExceeded {
            what: "density-matrix simulation",
            limit: MAX_DENSITY_QUBITS,
            got: n,
        });
    }
    let mut rho = DensityMatrix::zero(n);
    for g in c.gates() {
        apply_gate_density(&mut rho.data, n, g);
        if let Some(ch) = noise {
            for &q in g.qubits() {
                apply_noise(&mut rho.data, n, q, ch);
            }
        }
    }
    Ok(rho)
}
