//! Exact statevector and density-matrix simulation, Pauli-sum expectations,
//! single-qubit noise channels and the dense ground-energy oracle.

mod density;
pub(crate) mod kernels;
mod noise;
mod spectrum;
mod statevector;

pub use density::{run_density, DensityMatrix, MAX_DENSITY_QUBITS};
pub use kernels::{gate_matrix, GateMatrix, Mat2, Mat4, C64};
pub use noise::{NoiseChannel, NoiseKind};
pub use spectrum::{dense_matrix, exact_ground_energy, MAX_SPECTRUM_QUBITS};
pub use statevector::{run_statevector, StateVector, MAX_STATEVECTOR_QUBITS};

pub(crate) use density::{apply_gate_density, apply_noise, apply_signed_kraus};
pub(crate) use statevector::apply_gate;

use crate::circuit::Observable;
use crate::error::Result;

/// States an observable can be evaluated on.
pub trait QuantumState {
    fn expectation(&self, obs: &Observable) -> Result<f64>;
}

impl QuantumState for StateVector {
    fn expectation(&self, obs: &Observable) -> Result<f64> {
        StateVector::expectation(self, obs)
    }
}

impl QuantumState for DensityMatrix {
    fn expectation(&self, obs: &Observable) -> Result<f64> {
        DensityMatrix::expectation(self, obs)
    }
}

/// `sum_t coeff_t <pauli_t>` on either backend.
pub fn expectation<S: QuantumState>(state: &S, obs: &Observable) -> Result<f64> {
    state.expectation(obs)
}
