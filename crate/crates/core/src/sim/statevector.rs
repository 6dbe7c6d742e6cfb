use super::kernels::{
    apply_1q, apply_2q, gate_matrix, pauli_expectation, GateMatrix, PauliMasks, C64,
};
use crate::circuit::{BoundCircuit, BoundGate, Observable};
use crate::error::{Error, Result};

/// Largest register the dense statevector backend accepts.
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

/// Pure state on `n` qubits; `2^n` amplitudes with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: amps.len().trailing_zeros() as usize,
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidConfig(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        if obs.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: obs.n(),
            });
        }
        Ok(observable_on_amplitudes(&self.amps, obs))
    }

    /// Debug dump as `{"n", "amplitudes": [[re, im], ...]}`.
    pub fn to_json(&self) -> String {
        let amplitudes: Vec<[f64; 2]> = self.amps.iter().map(|a| [a.re, a.im]).collect();
        serde_json::json!({ "n": self.n, "amplitudes": amplitudes }).to_string()
    }
}

pub(crate) fn observable_on_amplitudes(amps: &[C64], obs: &Observable) -> f64 {
    let total: C64 = obs
        .terms()
        .iter()
        .map(|t| pauli_expectation(amps, &PauliMasks::new(&t.pauli)) * t.coeff)
        .sum();
    debug_assert!(
        total.im.abs() < 1e-8 * (1.0 + total.re.abs()),
        "non-real expectation {total}"
    );
    total.re
}

/// Applies a bound gate to an amplitude vector of an `n`-qubit register.
pub(crate) fn apply_gate(amps: &mut [C64], n: usize, gate: &BoundGate) {
    let q = gate.qubits();
    match gate_matrix(gate.kind, gate.angle) {
        GateMatrix::One(m) => apply_1q(amps, n - 1 - q[0], &m),
        GateMatrix::Two(m) => apply_2q(amps, n - 1 - q[0], n - 1 - q[1], &m),
    }
}

/// Runs `c` from `initial`, or from `|0...0>` when none is given.
pub fn run_statevector(c: &BoundCircuit, initial: Option<&StateVector>) -> Result<StateVector> {
    let n = c.n();
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::CapacityExceeded {
            what: "statevector simulation",
            limit: MAX_STATEVECTOR_QUBITS,
            got: n,
        });
    }
    let mut state = match initial {
        Some(s) if s.n != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.n,
            })
        }
        Some(s) => s.clone(),
        None => StateVector::zero(n),
    };
    for g in c.gates() {
        apply_gate(&mut state.amps, n, g);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use super::*;
    use crate::circuit::{Angle, Circuit, Gate, GateKind};

    fn bound(n: usize, gates: Vec<Gate>) -> BoundCircuit {
        BoundCircuit::try_from(&Circuit::new(n, gates, 0).unwrap()).unwrap()
    }

    fn obs(n: usize, s: &str) -> Observable {
        Observable::new(n, [(1.0, s.parse().unwrap())]).unwrap()
    }

    #[test]
    fn empty_circuit_is_identity() {
        let s = run_statevector(&bound(2, vec![]), None).unwrap();
        assert_eq!(s, StateVector::zero(2));
    }

    #[test]
    fn bell_state() {
        let c = bound(
            2,
            vec![Gate::single(GateKind::H, 0), Gate::two(GateKind::Cx, 0, 1)],
        );
        let s = run_statevector(&c, None).unwrap();
        let a = s.amplitudes();
        assert!((a[0].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((a[3].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
        assert!((s.expectation(&obs(2, "ZZ")).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let s = run_statevector(&bound(2, vec![Gate::single(GateKind::X, 0)]), None).unwrap();
        assert!((s.amplitudes()[2].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rx_amplitudes() {
        let theta = 0.9;
        let c = bound(
            1,
            vec![Gate::rotation(GateKind::Rx, 0, Angle::Fixed(theta))],
        );
        let s = run_statevector(&c, None).unwrap();
        assert!((s.amplitudes()[0] - C64::new((theta / 2.0).cos(), 0.0)).norm() < 1e-12);
        assert!((s.amplitudes()[1] - C64::new(0.0, -(theta / 2.0).sin())).norm() < 1e-12);
    }

    #[test]
    fn basic_expectations() {
        let zero = StateVector::zero(1);
        assert!((zero.expectation(&obs(1, "Z")).unwrap() - 1.0).abs() < 1e-12);
        let plus = run_statevector(
            &bound(
                1,
                vec![Gate::rotation(GateKind::Ry, 0, Angle::Fixed(PI / 2.0))],
            ),
            None,
        )
        .unwrap();
        assert!((plus.expectation(&obs(1, "X")).unwrap() - 1.0).abs() < 1e-12);
        let yplus = run_statevector(
            &bound(
                1,
                vec![Gate::rotation(GateKind::Rx, 0, Angle::Fixed(-PI / 2.0))],
            ),
            None,
        )
        .unwrap();
        assert!((yplus.expectation(&obs(1, "Y")).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_checks() {
        let c = bound(2, vec![]);
        assert!(run_statevector(&c, Some(&StateVector::zero(1))).is_err());
        assert!(StateVector::zero(1).expectation(&obs(2, "ZZ")).is_err());
        assert!(StateVector::from_amplitudes(1, vec![C64::new(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn json_dump() {
        let v: serde_json::Value = serde_json::from_str(&StateVector::zero(1).to_json()).unwrap();
        assert_eq!(v["amplitudes"], serde_json::json!([[1.0, 0.0], [0.0, 0.0]]));
    }
}
