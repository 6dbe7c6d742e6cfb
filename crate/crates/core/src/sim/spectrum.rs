use nalgebra::DMatrix;

use super::kernels::{PauliMasks, C64};
use crate::circuit::Observable;
use crate::error::{Error, Result};

pub const MAX_SPECTRUM_QUBITS: usize = 12;

/// Dense matrix of a Pauli sum.
pub fn dense_matrix(obs: &Observable) -> Result<DMatrix<C64>> {
    let n = obs.n();
    if n > MAX_SPECTRUM_QUBITS {
        return Err(Error::CapacityExceeded {
            what: "dense Hamiltonian",
            limit: MAX_SPECTRUM_QUBITS,
            got: n,
        });
    }
    let dim = 1usize << n;
    let mut h = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for t in obs.terms() {
        let masks = PauliMasks::new(&t.pauli);
        let phase = masks.global_phase() * t.coeff;
        for y in 0..dim {
            h[(y ^ masks.flip, y)] += phase * masks.sign(y);
        }
    }
    Ok(h)
}

/// Smallest eigenvalue of the Hermitian matrix of `obs`.
pub fn exact_ground_energy(obs: &Observable) -> Result<f64> {
    let h = dense_matrix(obs)?;
    let real = h.iter().all(|v| v.im == 0.0);
    let min = if real {
        h.map(|v| v.re).symmetric_eigenvalues().min()
    } else {
        h.symmetric_eigenvalues().min()
    };
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_z() {
        let obs = Observable::parse("1.0 Z").unwrap();
        assert!((exact_ground_energy(&obs).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zz_plus_xx() {
        // ZZ and XX commute; their joint eigenvalues on the Bell basis are (+-1, +-1),
        // so the minimum of 0.5 ZZ + 0.5 XX is -1 (singlet).
        let obs = Observable::parse("0.5 ZZ\n0.5 XX").unwrap();
        assert!((exact_ground_energy(&obs).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_hamiltonian_uses_hermitian_path() {
        // Y alone has eigenvalues +-1.
        let obs = Observable::parse("2.0 Y\n0.0 Z").unwrap();
        assert!((exact_ground_energy(&obs).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_guard() {
        let obs = Observable::new(13, [(1.0, "Z".repeat(13).parse().unwrap())]).unwrap();
        assert!(exact_ground_energy(&obs).is_err());
    }
}
