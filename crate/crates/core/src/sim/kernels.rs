//! Dense gate matrices and in-place amplitude kernels.
//!
//! Qubit 0 is the most significant bit of an amplitude index.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::circuit::{GateKind, Pauli, PauliString};

pub type C64 = Complex64;
/// Row-major 2x2 matrix.
pub type Mat2 = [[C64; 2]; 2];
/// Row-major 4x4 matrix on `|a b>` with `a` the first operand.
pub type Mat4 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
pub const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
pub const PAULI_Y: Mat2 = [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]];
pub const PAULI_Z: Mat2 = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];
pub const HADAMARD: Mat2 = [
    [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)],
    [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)],
];
pub const PHASE_S: Mat2 = [[ONE, ZERO], [ZERO, I]];
pub const PHASE_SDG: Mat2 = [[ONE, ZERO], [ZERO, C64::new(0.0, -1.0)]];
pub const PROJ_0: Mat2 = [[ONE, ZERO], [ZERO, ZERO]];
pub const PROJ_1: Mat2 = [[ZERO, ZERO], [ZERO, ONE]];

pub enum GateMatrix {
    One(Mat2),
    Two(Mat4),
}

/// `exp(-i angle P / 2)` for the rotation kinds; fixed matrices otherwise.
pub fn gate_matrix(kind: GateKind, angle: f64) -> GateMatrix {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    match kind {
        GateKind::Rx => GateMatrix::One([
            [C64::new(c, 0.0), C64::new(0.0, -s)],
            [C64::new(0.0, -s), C64::new(c, 0.0)],
        ]),
        GateKind::Ry => GateMatrix::One([
            [C64::new(c, 0.0), C64::new(-s, 0.0)],
            [C64::new(s, 0.0), C64::new(c, 0.0)],
        ]),
        GateKind::Rz => GateMatrix::One([[C64::new(c, -s), ZERO], [ZERO, C64::new(c, s)]]),
        GateKind::H => GateMatrix::One(HADAMARD),
        GateKind::X => GateMatrix::One(PAULI_X),
        GateKind::Y => GateMatrix::One(PAULI_Y),
        GateKind::Z => GateMatrix::One(PAULI_Z),
        GateKind::S => GateMatrix::One(PHASE_S),
        GateKind::Cx => {
            let mut m = [[ZERO; 4]; 4];
            m[0][0] = ONE;
            m[1][1] = ONE;
            m[2][3] = ONE;
            m[3][2] = ONE;
            GateMatrix::Two(m)
        }
        GateKind::Cz => {
            let mut m = [[ZERO; 4]; 4];
            m[0][0] = ONE;
            m[1][1] = ONE;
            m[2][2] = ONE;
            m[3][3] = -ONE;
            GateMatrix::Two(m)
        }
        GateKind::Identity2 => {
            let mut m = [[ZERO; 4]; 4];
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = ONE;
            }
            GateMatrix::Two(m)
        }
    }
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_dagger(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn mat2_conj(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[0][1].conj()],
        [a[1][0].conj(), a[1][1].conj()],
    ]
}

pub fn mat4_conj(a: &Mat4) -> Mat4 {
    let mut out = *a;
    out.iter_mut().flatten().for_each(|v| *v = v.conj());
    out
}

/// Applies `m` to the qubit stored at bit `bit` of the index.
pub fn apply_1q(amps: &mut [C64], bit: usize, m: &Mat2) {
    let stride = 1usize << bit;
    let len = amps.len();
    let mut base = 0;
    while base < len {
        for i in base..base + stride {
            let j = i + stride;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += 2 * stride;
    }
}

/// Applies `m` to the qubit pair stored at bits (`bit_a`, `bit_b`); `bit_a` is the first operand.
pub fn apply_2q(amps: &mut [C64], bit_a: usize, bit_b: usize, m: &Mat4) {
    let (ma, mb) = (1usize << bit_a, 1usize << bit_b);
    for i in 0..amps.len() {
        if i & ma != 0 || i & mb != 0 {
            continue;
        }
        let idx = [i, i | mb, i | ma, i | ma | mb];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (r, &target) in idx.iter().enumerate() {
            amps[target] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
        }
    }
}

/// Bit masks describing a Pauli string on an `n`-qubit index space.
///
/// `P |y> = i^{ny} (-1)^{popcount(y & phase_mask)} |y ^ flip_mask>`.
#[derive(Debug, Clone, Copy)]
pub struct PauliMasks {
    pub flip: usize,
    pub phase: usize,
    pub y_count: u32,
}

impl PauliMasks {
    pub fn new(p: &PauliString) -> Self {
        let n = p.len();
        let (mut flip, mut phase, mut y_count) = (0usize, 0usize, 0u32);
        for (q, op) in p.ops().iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match op {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    y_count += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        PauliMasks {
            flip,
            phase,
            y_count,
        }
    }

    pub fn global_phase(&self) -> C64 {
        match self.y_count % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }

    #[inline]
    pub fn sign(&self, y: usize) -> f64 {
        if (y & self.phase).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// `<psi| P |psi>` for a possibly unnormalized amplitude vector.
pub fn pauli_expectation(amps: &[C64], masks: &PauliMasks) -> C64 {
    let mut acc = ZERO;
    if masks.flip == 0 {
        for (y, a) in amps.iter().enumerate() {
            acc += a.norm_sqr() * masks.sign(y);
        }
        return acc * masks.global_phase();
    }
    for (y, a) in amps.iter().enumerate() {
        acc += amps[y ^ masks.flip].conj() * *a * masks.sign(y);
    }
    acc * masks.global_phase()
}

/// `tr(P rho)` for a row-major `dim x dim` matrix.
pub fn pauli_trace(rho: &[C64], dim: usize, masks: &PauliMasks) -> C64 {
    let mut acc = ZERO;
    for y in 0..dim {
        acc += rho[y * dim + (y ^ masks.flip)] * masks.sign(y);
    }
    acc * masks.global_phase()
}
