use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use knitvqa::bench::{
    gen_regular_graph, h2_hamiltonian, load_hamiltonian, run_benchmark, Algo, ExperimentConfig,
    Study,
};
use knitvqa::circuit::{build_ansatz, AnsatzSpec, Circuit, Observable};
use knitvqa::knit::{
    brute_force_min_cut, cut_circuit, default_block_count, kway_min_cut, plan_circuit,
    plan_circuit_exact, reconstruct_exact, reconstruct_sampled, sampling_overhead, WeightedGraph,
};
use knitvqa::qas::{search, FitnessWeights, SearchConfig};
use knitvqa::vqa::{train_full, train_subcircuit, ProblemInstance, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "knitvqa",
    version,
    about = "Circuit knitting for variational quantum algorithms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition a circuit's qubits (or a plain graph) into device-sized blocks.
    Partition(PartitionArgs),
    /// Cut a circuit and reconstruct an observable's expectation value.
    Cut(CutArgs),
    /// Search for an ansatz under the overhead-aware fitness.
    Search(SearchArgs),
    /// Train an ansatz with fragment-local or full gradients.
    Train(TrainArgs),
    /// Run a benchmark study and write its CSV.
    Bench(BenchArgs),
    /// Generate a random regular graph as an edge list.
    GenGraph(GenGraphArgs),
}

#[derive(Args)]
struct PartitionArgs {
    /// Circuit JSON file.
    #[arg(long, conflicts_with = "graph")]
    circuit: Option<PathBuf>,
    /// Edge-list file (`u v [weight]` per line).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Device capacity in qubits.
    #[arg(long, short)]
    m: usize,
    /// Number of blocks; defaults to ceil(n / m).
    #[arg(long)]
    k: Option<usize>,
    /// Use exhaustive search instead of the heuristic.
    #[arg(long)]
    exact: bool,
    #[arg(long, required_unless_present = "exact")]
    seed: Option<u64>,
}

#[derive(Args)]
struct CutArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Observable file (`coeff pauli` per line).
    #[arg(long)]
    observable: PathBuf,
    #[arg(long, short)]
    m: usize,
    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Monte Carlo shots; exact reconstruction when omitted.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    #[arg(long, default_value = "qaoa")]
    algo: String,
    /// Graph size for max-cut.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Graph regularity for max-cut.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Edge-list file instead of a generated graph.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Hamiltonian file for VQE (the shipped H2 file when omitted).
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
}

impl ProblemArgs {
    fn problem(&self, seed: u64) -> Result<ProblemInstance> {
        Ok(match self.algo.parse::<Algo>()? {
            Algo::Qaoa => {
                let g = match &self.graph {
                    Some(p) => WeightedGraph::load(p, None)?,
                    None => gen_regular_graph(self.n, self.d, seed)?,
                };
                ProblemInstance::maxcut(g)?
            }
            Algo::Vqe => {
                let h = match &self.hamiltonian {
                    Some(p) => load_hamiltonian(p)?,
                    None => h2_hamiltonian(),
                };
                ProblemInstance::vqe(h)?
            }
        })
    }
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, short, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    w_g: f64,
    #[arg(long, default_value_t = 0.5)]
    w_h: f64,
    #[arg(long, default_value_t = 0.0)]
    w_i: f64,
    #[arg(long, default_value_t = 6561.0)]
    eta: f64,
    #[arg(long, default_value_t = 8)]
    population: usize,
    #[arg(long, default_value_t = 5)]
    iterations: usize,
    #[arg(long, default_value_t = 200)]
    train_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    train_tol: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Write the report JSON here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the `iter,best_f,best_g,best_h` history here.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Ansatz spec JSON (as found in a search report's `best.spec`).
    #[arg(long, conflicts_with = "circuit")]
    ansatz: Option<PathBuf>,
    /// Circuit JSON.
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[arg(long, short, default_value_t = 3)]
    m: usize,
    #[arg(long)]
    seed: u64,
    /// Use the full-gradient baseline.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the `iter,loss` history here.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    study: Option<String>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, short)]
    m: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the effective config and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct GenGraphArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn read_circuit(path: &PathBuf) -> Result<Circuit> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Circuit::from_json(&text)?)
}

fn partition(a: PartitionArgs) -> Result<()> {
    match (&a.circuit, &a.graph) {
        (Some(path), _) => {
            let c = read_circuit(path)?;
            let plan = if a.exact {
                plan_circuit_exact(&c, a.m)?
            } else {
                plan_circuit(&c, a.m, a.seed.unwrap_or(0))?
            };
            let out = json!({ "plan": plan, "overhead": sampling_overhead(&plan) });
            emit(&serde_json::to_string_pretty(&out)?, None)
        }
        (None, Some(path)) => {
            let g = WeightedGraph::load(path, None)?;
            let k = a.k.unwrap_or_else(|| default_block_count(g.nodes(), a.m));
            let p = if a.exact {
                brute_force_min_cut(&g, k, a.m)?
            } else {
                kway_min_cut(&g, k, a.m, a.seed.unwrap_or(0))?
            };
            emit(&serde_json::to_string_pretty(&p)?, None)
        }
        (None, None) => bail!("pass --circuit or --graph"),
    }
}

fn cut(a: CutArgs) -> Result<()> {
    let c = read_circuit(&a.circuit)?;
    let obs = Observable::load(&a.observable)?;
    let plan = plan_circuit(&c, a.m, a.seed)?;
    let prog = cut_circuit(&c, &plan)?;
    let out = match a.shots {
        None => json!({
            "cuts": prog.cut_points().len(),
            "overhead": sampling_overhead(&plan),
            "fragments": prog.fragments().iter().map(|f| &f.qubits).collect::<Vec<_>>(),
            "expectation": reconstruct_exact(&prog, &obs, &a.theta)?,
        }),
        Some(shots) => {
            let est = reconstruct_sampled(&prog, &obs, &a.theta, shots, a.seed)?;
            json!({
                "cuts": prog.cut_points().len(),
                "overhead": sampling_overhead(&plan),
                "fragments": prog.fragments().iter().map(|f| &f.qubits).collect::<Vec<_>>(),
                "expectation": est.estimate,
                "std_error": est.std_error,
                "shots": shots,
            })
        }
    };
    emit(&serde_json::to_string_pretty(&out)?, None)
}

fn run_search(a: SearchArgs) -> Result<()> {
    let problem = a.problem.problem(a.seed)?;
    let weights = FitnessWeights {
        w_g: a.w_g,
        w_h: a.w_h,
        w_i: a.w_i,
        eta: a.eta,
    };
    let config = SearchConfig {
        population_size: a.population,
        max_iterations: a.iterations,
        train: TrainConfig {
            max_iter: a.train_iter,
            tol: a.train_tol,
            step: a.step,
        },
        restarts: a.restarts,
        seed: a.seed,
        capacity: a.m,
        max_layers: a.layers,
        ..SearchConfig::default()
    };
    let report = search(&problem, &weights, &config)?;
    if let Some(p) = &a.history {
        emit(&report.history_csv(), Some(p))?;
    }
    emit(&report.to_json()?, a.output.as_ref())
}

fn train(a: TrainArgs) -> Result<()> {
    let problem = a.problem.problem(a.seed)?;
    let circuit = match (&a.ansatz, &a.circuit) {
        (Some(p), _) => {
            let spec: AnsatzSpec = serde_json::from_str(&std::fs::read_to_string(p)?)?;
            build_ansatz(&spec, problem.n())?
        }
        (None, Some(p)) => read_circuit(p)?,
        (None, None) => bail!("pass --ansatz or --circuit"),
    };
    let plan = plan_circuit(&circuit, a.m, a.seed)?;
    let prog = cut_circuit(&circuit, &plan)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let theta0: Vec<f64> = (0..circuit.num_params())
        .map(|_| rng.gen_range(-PI..PI))
        .collect();
    let config = TrainConfig {
        max_iter: a.max_iter,
        tol: a.tol,
        step: a.step,
    };
    let report = if a.full {
        train_full(&prog, &problem, &theta0, &config)?
    } else {
        train_subcircuit(&prog, &problem, &theta0, &config)?
    };
    if let Some(p) = &a.loss_csv {
        emit(&report.loss_csv(), Some(p))?;
    }
    emit(&report.to_json()?, a.output.as_ref())
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = &a.study {
        cfg.study = s.parse::<Study>()?;
    }
    if let Some(s) = &a.algo {
        cfg.algo = s.parse::<Algo>()?;
    }
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.d = a.d.unwrap_or(cfg.d);
    cfg.capacity = a.m.unwrap_or(cfg.capacity);
    cfg.layers = a.layers.unwrap_or(cfg.layers);
    cfg.shots = a.shots.unwrap_or(cfg.shots);
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    if a.hamiltonian.is_some() {
        cfg.hamiltonian = a.hamiltonian;
    }
    if a.output.is_some() {
        cfg.output = a.output;
    }
    if a.dump_config {
        return emit(&cfg.to_json()?, None);
    }
    let out = run_benchmark(&cfg)?;
    for (row, reason) in &out.failures {
        eprintln!("row {row} failed: {reason}");
    }
    emit(&out.to_csv()?, cfg.output.as_ref())
}

fn gen_graph(a: GenGraphArgs) -> Result<()> {
    let g = gen_regular_graph(a.n, a.d, a.seed)?;
    emit(&g.to_edge_list(), a.output.as_ref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Partition(a) => partition(a),
        Command::Cut(a) => cut(a),
        Command::Search(a) => run_search(a),
        Command::Train(a) => train(a),
        Command::Bench(a) => bench(a),
        Command::GenGraph(a) => gen_graph(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
