//! Circuit knitting: qubit-interaction graphs, capacity-constrained partitioning,
//! quasiprobability gate cutting and reconstruction of expectation values.

mod eval;
mod graph;
mod partition;
mod program;
mod qpd;

pub use eval::{
    check_exact, reconstruct_exact, reconstruct_exact_with, reconstruct_sampled, Backend,
    FragmentTable, KnitEvaluator, SampledEstimate, MAX_EXACT_CUTS,
};
pub use graph::{interaction_graph, Edge, WeightedGraph};
pub use partition::{
    brute_force_min_cut, default_block_count, kway_min_cut, plan_circuit, plan_circuit_exact,
    sampling_overhead, GraphPartition, PartitionPlan, MAX_BRUTE_FORCE_NODES, RESTARTS,
};
pub use program::{cut_circuit, CutPoint, Fragment, Insertion, KnitProgram, Side};
pub use qpd::{one_norm, qpd_terms, LocalOp, QpdTerm};
