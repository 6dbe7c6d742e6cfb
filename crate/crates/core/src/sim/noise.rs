use serde::{Deserialize, Serialize};

use super::kernels::{mat2_dagger, mat2_mul, Mat2, C64, IDENTITY, PAULI_X, PAULI_Y, PAULI_Z};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NoiseKind {
    /// Depolarizing.
    Dep,
    /// Amplitude damping.
    Amp,
    /// Phase damping.
    Pha,
    /// Thermal relaxation, modelled as amplitude damping followed by phase damping.
    The,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::Dep,
        NoiseKind::Amp,
        NoiseKind::Pha,
        NoiseKind::The,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Dep => "DEP",
            NoiseKind::Amp => "AMP",
            NoiseKind::Pha => "PHA",
            NoiseKind::The => "THE",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown noise kind {s:?}")))
    }
}

/// Single-qubit noise channel applied after every gate on each of the gate's qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseChannel {
    kind: NoiseKind,
    probability: f64,
    kraus: Vec<Mat2>,
}

fn scaled(m: &Mat2, s: f64) -> Mat2 {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

fn damping(gamma: f64) -> [Mat2; 2] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    [
        [[one, z], [z, C64::new((1.0 - gamma).sqrt(), 0.0)]],
        [[z, C64::new(gamma.sqrt(), 0.0)], [z, z]],
    ]
}

fn dephasing(lambda: f64) -> [Mat2; 2] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    [
        [[one, z], [z, C64::new((1.0 - lambda).sqrt(), 0.0)]],
        [[z, z], [z, C64::new(lambda.sqrt(), 0.0)]],
    ]
}

impl NoiseChannel {
    pub fn new(kind: NoiseKind, probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::InvalidConfig(format!(
                "noise probability {probability} outside [0, 1]"
            )));
        }
        let p = probability;
        let kraus = match kind {
            // rho -> (1 - p) rho + p I/2
            NoiseKind::Dep => vec![
                scaled(&IDENTITY, (1.0 - 0.75 * p).sqrt()),
                scaled(&PAULI_X, (p / 4.0).sqrt()),
                scaled(&PAULI_Y, (p / 4.0).sqrt()),
                scaled(&PAULI_Z, (p / 4.0).sqrt()),
            ],
            NoiseKind::Amp => damping(p).to_vec(),
            NoiseKind::Pha => dephasing(p).to_vec(),
            NoiseKind::The => {
                let amp = damping(p);
                let pha = dephasing(p);
                pha.iter()
                    .flat_map(|b| amp.iter().map(move |a| mat2_mul(b, a)))
                    .collect()
            }
        };
        Ok(NoiseChannel {
            kind,
            probability,
            kraus,
        })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }

    pub fn kraus(&self) -> &[Mat2] {
        &self.kraus
    }

    /// `sum_k K^dagger K`.
    pub fn completeness(&self) -> Mat2 {
        let mut acc = [[C64::new(0.0, 0.0); 2]; 2];
        for k in &self.kraus {
            let m = mat2_mul(&mat2_dagger(k), k);
            acc.iter_mut()
                .flatten()
                .zip(m.iter().flatten())
                .for_each(|(a, b)| *a += b);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kraus_sets_are_complete() {
        for kind in NoiseKind::ALL {
            for p in [0.0, 0.01, 0.5, 1.0] {
                let ch = NoiseChannel::new(kind, p).unwrap();
                let s = ch.completeness();
                for (i, row) in s.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((v - C64::new(e, 0.0)).norm() < 1e-10, "{kind:?} p={p}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(NoiseChannel::new(NoiseKind::Dep, 1.5).is_err());
        assert!(NoiseChannel::new(NoiseKind::Amp, -0.1).is_err());
    }

    #[test]
    fn parses_names() {
        assert_eq!("the".parse::<NoiseKind>().unwrap(), NoiseKind::The);
        assert!("xyz".parse::<NoiseKind>().is_err());
    }
}
