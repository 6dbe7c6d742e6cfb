use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; character `i` acts on qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        PauliString(ops)
    }

    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    /// `Z` on the two listed qubits, identity elsewhere.
    pub fn zz(n: usize, a: usize, b: usize) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[a] = Pauli::Z;
        ops[b] = Pauli::Z;
        PauliString(ops)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Restriction to the listed qubits, in the listed order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        PauliString(qubits.iter().map(|&q| self.0[q]).collect())
    }
}

impl FromStr for PauliString {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| format!("invalid Pauli character {c:?}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(PauliString)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.as_char()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub pauli: PauliString,
}

/// Real-weighted sum of Pauli strings over `n` qubits. Duplicate strings are merged
/// in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl Observable {
    pub fn new(n: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut merged: Vec<PauliTerm> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for (coeff, pauli) in terms {
            if pauli.len() != n {
                return Err(Error::InvalidObservable(format!(
                    "Pauli string {pauli} has length {}, expected {n}",
                    pauli.len()
                )));
            }
            if !coeff.is_finite() {
                return Err(Error::InvalidObservable(format!(
                    "non-finite coefficient on {pauli}"
                )));
            }
            match index.get(&pauli) {
                Some(&i) => {
                    let t: &mut PauliTerm = &mut merged[i];
                    t.coeff += coeff;
                }
                None => {
                    index.insert(pauli.clone(), merged.len());
                    merged.push(PauliTerm { coeff, pauli });
                }
            }
        }
        Ok(Observable { n, terms: merged })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Same Pauli strings with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Observable {
        Observable {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coeff: t.coeff * factor,
                    pauli: t.pauli.clone(),
                })
                .collect(),
        }
    }

    /// Parses the `<coefficient> <pauli-string>` line format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut n: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(c), Some(p), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected `<coefficient> <pauli-string>`".into(),
                });
            };
            let coeff: f64 = c.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid coefficient {c:?}"),
            })?;
            if !coeff.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "coefficient must be finite".into(),
                });
            }
            let pauli: PauliString = p.parse().map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;
            match n {
                None => n = Some(pauli.len()),
                Some(len) if len != pauli.len() => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "Pauli string length {} differs from earlier length {len}",
                            pauli.len()
                        ),
                    })
                }
                _ => {}
            }
            terms.push((coeff, pauli));
        }
        let n = n.ok_or_else(|| Error::InvalidObservable("no terms".into()))?;
        Observable::new(n, terms)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Observable::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        self.terms
            .iter()
            .map(|t| format!("{} {}\n", t.coeff, t.pauli))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_duplicates() {
        let obs = Observable::parse("0.5 ZZ\n0.5 ZZ\n").unwrap();
        assert_eq!(obs.terms().len(), 1);
        assert_eq!(obs.terms()[0].coeff, 1.0);
    }

    #[test]
    fn parses_comments_and_infers_width() {
        let obs = Observable::parse("# H\n\n1.0 Z   # trailing\n").unwrap();
        assert_eq!(obs.n(), 1);
        let h = Observable::parse("-0.8105 IIII\n0.17 ZIII").unwrap();
        assert_eq!(h.n(), 4);
    }

    #[test]
    fn reports_line_numbers() {
        assert_eq!(
            Observable::parse("1.0 Z\nfoo Z\n"),
            Err(Error::Parse {
                line: 2,
                message: "invalid coefficient \"foo\"".into()
            })
        );
        assert!(matches!(
            Observable::parse("1.0 ZZ\n1.0 Z\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Observable::parse("1.0 ZQ\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Observable::parse("1.0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_width_mismatch() {
        let p: PauliString = "ZZ".parse().unwrap();
        assert!(Observable::new(3, [(1.0, p)]).is_err());
    }

    #[test]
    fn restriction_follows_given_order() {
        let p: PauliString = "XYZI".parse().unwrap();
        assert_eq!(p.restrict(&[2, 0]).to_string(), "ZX");
    }
}
