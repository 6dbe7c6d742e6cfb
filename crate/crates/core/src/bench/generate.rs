use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::Observable;
use crate::error::{Error, Result};
use crate::knit::WeightedGraph;

/// 4-qubit H2 Hamiltonian shipped with the crate.
pub const H2_HAMILTONIAN: &str = include_str!("../../data/h2.txt");

const MAX_PAIRING_ATTEMPTS: usize = 100_000;

/// Uniform simple `d`-regular graph on `n` nodes with unit weights.
///
/// Pairing model: `n*d` half-edges are matched at random and the matching is discarded
/// whenever it produces a self-loop or a repeated edge.
pub fn gen_regular_graph(n: usize, d: usize, seed: u64) -> Result<WeightedGraph> {
    if (n * d) % 2 == 1 {
        return Err(Error::InvalidGraph(format!(
            "n*d must be even, got n={n}, d={d}"
        )));
    }
    if d >= n && d > 0 {
        return Err(Error::InvalidGraph(format!(
            "degree {d} needs more than {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
        points.shuffle(&mut rng);
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(points.len() / 2);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || edges.contains(&(u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return WeightedGraph::new(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)));
    }
    Err(Error::InvalidGraph(format!(
        "no simple {d}-regular graph on {n} nodes after {MAX_PAIRING_ATTEMPTS} pairings"
    )))
}

/// Reads a `coeff pauli` file; duplicate strings are merged.
pub fn load_hamiltonian(path: impl AsRef<Path>) -> Result<Observable> {
    Observable::load(path)
}

pub fn h2_hamiltonian() -> Observable {
    Observable::parse(H2_HAMILTONIAN).expect("shipped Hamiltonian parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_regular_graphs() {
        let g = gen_regular_graph(4, 1, 0).unwrap();
        assert_eq!(g.edges().len(), 2);
        let g = gen_regular_graph(6, 3, 9).unwrap();
        assert_eq!(g.edges().len(), 9);
        assert!((0..6).all(|v| g.degree(v) == 3));
        assert_eq!(gen_regular_graph(6, 3, 9).unwrap(), g);
    }

    #[test]
    fn infeasible_degree() {
        assert!(gen_regular_graph(5, 3, 0).is_err());
        assert!(gen_regular_graph(3, 3, 0).is_err());
        assert_eq!(gen_regular_graph(3, 0, 0).unwrap().edges().len(), 0);
    }

    #[test]
    fn shipped_h2() {
        let h = h2_hamiltonian();
        assert_eq!(h.n(), 4);
        assert_eq!(h.terms().len(), 15);
    }
}
