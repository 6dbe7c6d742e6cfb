//! Population-based ansatz search under an overhead-aware fitness.

mod search;

pub use search::{
    derive_seed, evaluate_candidate, fitness, mutate, prune_random_subset, random_layer,
    random_spec, search, Candidate, FitnessWeights, HistoryRow, SearchConfig, SearchReport,
};
