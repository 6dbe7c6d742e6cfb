//! Problem generators, Hamiltonian ingestion and the seeded experiment runner.

mod experiment;
mod generate;

pub use experiment::{
    csv_without_wall_time, rows_to_csv, run_benchmark, Algo, AnsatzChoice, BenchOutput, BenchRow,
    EvalMode, ExperimentConfig, NoisePolicy, Study,
};
pub use generate::{gen_regular_graph, h2_hamiltonian, load_hamiltonian, H2_HAMILTONIAN};
