use crate::circuit::{Observable, PauliString};
use crate::error::{Error, Result};
use crate::knit::WeightedGraph;
use crate::sim::exact_ground_energy;

/// Exhaustive Max-Cut is limited to this many nodes.
pub const MAX_EXHAUSTIVE_CUT_NODES: usize = 20;

/// Max-Cut cost as `offset + <observable>`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxCutCost {
    pub offset: f64,
    pub observable: Observable,
}

/// `sum over edges of w (1 - Z_u Z_v) / 2`, with the constant part kept as a scalar.
pub fn maxcut_observable(g: &WeightedGraph) -> MaxCutCost {
    let n = g.nodes();
    let terms = g
        .edges()
        .iter()
        .map(|e| (-0.5 * e.weight, PauliString::zz(n, e.u, e.v)));
    let observable = Observable::new(n, terms).expect("graph edges are valid Pauli terms");
    MaxCutCost {
        offset: 0.5 * g.total_weight(),
        observable,
    }
}

/// Largest cut weight over all bipartitions.
pub fn optimal_cut(g: &WeightedGraph) -> Result<f64> {
    let n = g.nodes();
    if n > MAX_EXHAUSTIVE_CUT_NODES {
        return Err(Error::CapacityExceeded {
            what: "exhaustive max-cut nodes",
            limit: MAX_EXHAUSTIVE_CUT_NODES,
            got: n,
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let edges: Vec<(usize, usize, f64)> = g.edges().iter().map(|e| (e.u, e.v, e.weight)).collect();
    // Node n-1 is pinned to side 0; the complement gives the same cut.
    let best = (0u32..1 << (n - 1))
        .map(|mask| {
            edges
                .iter()
                .filter(|(u, v, _)| (mask >> u ^ mask >> v) & 1 == 1)
                .map(|e| e.2)
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok(best)
}

/// `expected / optimal` for the graph's exhaustive optimum.
pub fn approximation_ratio(expected_cut: f64, g: &WeightedGraph) -> Result<f64> {
    ratio(expected_cut, optimal_cut(g)?)
}

fn ratio(expected: f64, optimal: f64) -> Result<f64> {
    if optimal == 0.0 {
        return Err(Error::ZeroOptimum);
    }
    Ok(expected / optimal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    QaoaMaxCut,
    Vqe,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::QaoaMaxCut => "qaoa",
            ProblemKind::Vqe => "vqe",
        }
    }
}

/// An optimization target together with its reference optimum.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemInstance {
    MaxCut {
        graph: WeightedGraph,
        cost: MaxCutCost,
        optimal: f64,
    },
    Vqe {
        hamiltonian: Observable,
        reference: f64,
    },
}

impl ProblemInstance {
    pub fn maxcut(graph: WeightedGraph) -> Result<Self> {
        let optimal = optimal_cut(&graph)?;
        if optimal == 0.0 {
            return Err(Error::ZeroOptimum);
        }
        let cost = maxcut_observable(&graph);
        Ok(ProblemInstance::MaxCut {
            graph,
            cost,
            optimal,
        })
    }

    /// The reference energy comes from dense diagonalization.
    pub fn vqe(hamiltonian: Observable) -> Result<Self> {
        let reference = exact_ground_energy(&hamiltonian)?;
        Ok(ProblemInstance::Vqe {
            hamiltonian,
            reference,
        })
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemInstance::MaxCut { .. } => ProblemKind::QaoaMaxCut,
            ProblemInstance::Vqe { .. } => ProblemKind::Vqe,
        }
    }

    pub fn n(&self) -> usize {
        self.observable().n()
    }

    /// The observable whose expectation the loss is built from.
    pub fn observable(&self) -> &Observable {
        match self {
            ProblemInstance::MaxCut { cost, .. } => &cost.observable,
            ProblemInstance::Vqe { hamiltonian, .. } => hamiltonian,
        }
    }

    /// Optimal cut (Max-Cut) or ground energy (VQE).
    pub fn reference(&self) -> f64 {
        match self {
            ProblemInstance::MaxCut { optimal, .. } => *optimal,
            ProblemInstance::Vqe { reference, .. } => *reference,
        }
    }

    /// Minimization loss from `<observable>`: negative expected cut, or the energy.
    pub fn loss_from_expectation(&self, expectation: f64) -> f64 {
        match self {
            ProblemInstance::MaxCut { cost, .. } => -(cost.offset + expectation),
            ProblemInstance::Vqe { .. } => expectation,
        }
    }

    /// Approximation ratio `r` (Max-Cut) or energy deviation `delta` (VQE).
    pub fn performance(&self, loss: f64) -> f64 {
        match self {
            ProblemInstance::MaxCut { optimal, .. } => -loss / optimal,
            ProblemInstance::Vqe { reference, .. } => (loss - reference).abs(),
        }
    }

    /// Performance as a lower-is-better quantity: `1 - r` or `delta`.
    pub fn performance_loss(&self, loss: f64) -> f64 {
        match self {
            ProblemInstance::MaxCut { .. } => 1.0 - self.performance(loss),
            ProblemInstance::Vqe { .. } => self.performance(loss),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_cost() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let c = maxcut_observable(&g);
        assert_eq!(c.offset, 0.5);
        assert_eq!(c.observable.terms().len(), 1);
        assert_eq!(c.observable.terms()[0].coeff, -0.5);
        assert_eq!(c.observable.terms()[0].pauli.to_string(), "ZZ");
        assert_eq!(approximation_ratio(0.5, &g).unwrap(), 0.5);
        assert_eq!(approximation_ratio(1.0, &g).unwrap(), 1.0);
    }

    #[test]
    fn triangle_cost() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let c = maxcut_observable(&g);
        assert_eq!(c.offset, 1.5);
        assert!(c.observable.terms().iter().all(|t| t.coeff == -0.5));
        assert_eq!(optimal_cut(&g).unwrap(), 2.0);
    }

    #[test]
    fn prism_optimum_matches_enumeration() {
        let g = WeightedGraph::new(
            6,
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 0, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (5, 3, 1.0),
                (0, 3, 1.0),
                (1, 4, 1.0),
                (2, 5, 1.0),
            ],
        )
        .unwrap();
        let mut best = 0.0f64;
        for mask in 0..64usize {
            let side: Vec<usize> = (0..6).map(|i| mask >> i & 1).collect();
            best = best.max(g.cut_weight(&side));
        }
        assert_eq!(optimal_cut(&g).unwrap(), best);
        assert_eq!(best, 7.0);
    }

    #[test]
    fn zero_optimum_is_an_error() {
        let g = WeightedGraph::new(3, []).unwrap();
        assert_eq!(approximation_ratio(0.0, &g), Err(Error::ZeroOptimum));
        assert!(ProblemInstance::maxcut(g).is_err());
    }

    #[test]
    fn vqe_reference_and_delta() {
        let p = ProblemInstance::vqe(Observable::parse("1.0 Z").unwrap()).unwrap();
        assert!((p.reference() + 1.0).abs() < 1e-12);
        assert!((p.performance(-0.9) - 0.1).abs() < 1e-12);
        assert_eq!(p.kind().name(), "vqe");
    }
}
