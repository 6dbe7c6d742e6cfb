use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{gen_regular_graph, h2_hamiltonian, load_hamiltonian};
use crate::circuit::{build_ansatz, qaoa_template, AnsatzSpec, Circuit};
use crate::error::{Error, Result};
use crate::knit::{
    cut_circuit, plan_circuit, reconstruct_sampled, sampling_overhead, Backend, KnitProgram,
};
use crate::qas::{random_layer, search, Candidate, FitnessWeights, SearchConfig};
use crate::sim::{NoiseChannel, NoiseKind};
use crate::vqa::{train_subcircuit, LossEngine, ProblemInstance, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Search,
    Train,
    CapacitySweep,
    LayerSweep,
    WeightSweep,
    Noise,
}

impl Study {
    pub const ALL: [Study; 6] = [
        Study::Search,
        Study::Train,
        Study::CapacitySweep,
        Study::LayerSweep,
        Study::WeightSweep,
        Study::Noise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::Search => "search",
            Study::Train => "train",
            Study::CapacitySweep => "capacity-sweep",
            Study::LayerSweep => "layer-sweep",
            Study::WeightSweep => "weight-sweep",
            Study::Noise => "noise",
        }
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Study::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown study {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Qaoa,
    Vqe,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Qaoa => "qaoa",
            Algo::Vqe => "vqe",
        }
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qaoa" => Ok(Algo::Qaoa),
            "vqe" => Ok(Algo::Vqe),
            _ => Err(Error::InvalidConfig(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// How the reported performance is measured at the trained parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Exact,
    Sampled,
}

/// Ansatz used by the studies that do not search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzChoice {
    /// Seeded random layers from the search alphabet, exactly `layers` deep.
    Random,
    /// Cost/mixer template with one shared angle pair per layer (Max-Cut only).
    QaoaTemplate,
    /// Best ansatz of a search run.
    Searched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoisePolicy {
    pub kinds: Vec<NoiseKind>,
    pub probability: f64,
}

impl Default for NoisePolicy {
    fn default() -> Self {
        NoisePolicy {
            kinds: NoiseKind::ALL.to_vec(),
            probability: 0.01,
        }
    }
}

/// Everything a benchmark run depends on. `n`, `capacity`, `layers` and the per-row seed
/// override the matching fields of `search`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub study: Study,
    pub algo: Algo,
    /// Graph size (ignored for VQE, where the Hamiltonian fixes it).
    pub n: usize,
    /// Graph regularity.
    pub d: usize,
    pub capacity: usize,
    pub layers: usize,
    pub seeds: Vec<u64>,
    pub capacities: Vec<usize>,
    pub layer_values: Vec<usize>,
    pub w_g_values: Vec<f64>,
    pub weights: FitnessWeights,
    pub noise: NoisePolicy,
    pub mode: EvalMode,
    pub shots: usize,
    /// `None` selects the shipped H2 file.
    pub hamiltonian: Option<PathBuf>,
    pub ansatz: AnsatzChoice,
    pub search: SearchConfig,
    pub train: TrainConfig,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            study: Study::Search,
            algo: Algo::Qaoa,
            n: 6,
            d: 3,
            capacity: 3,
            layers: 3,
            seeds: (0..5).collect(),
            capacities: (2..=7).collect(),
            layer_values: vec![1, 2, 3],
            w_g_values: (1..=10).map(|i| i as f64 / 10.0).collect(),
            weights: FitnessWeights::default(),
            noise: NoisePolicy::default(),
            mode: EvalMode::Exact,
            shots: 10_000,
            hamiltonian: None,
            ansatz: AnsatzChoice::Random,
            search: SearchConfig::default(),
            train: TrainConfig::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.capacity == 0 || self.layers == 0 {
            return bad("capacity and layers must be at least 1".into());
        }
        if self.algo == Algo::Qaoa && self.n < 2 {
            return bad("max-cut needs at least 2 nodes".into());
        }
        if self.mode == EvalMode::Sampled && self.shots == 0 {
            return bad("sampled mode needs shots >= 1".into());
        }
        match self.study {
            Study::CapacitySweep if self.capacities.is_empty() || self.capacities.contains(&0) => {
                return bad("capacities must be non-empty and positive".into())
            }
            Study::LayerSweep if self.layer_values.is_empty() || self.layer_values.contains(&0) => {
                return bad("layer_values must be non-empty and positive".into())
            }
            Study::WeightSweep
                if self.w_g_values.is_empty()
                    || self.w_g_values.iter().any(|w| !(0.0..=1.0).contains(w)) =>
            {
                return bad("w_g_values must lie in [0, 1]".into())
            }
            Study::Noise if !(0.0..=1.0).contains(&self.noise.probability) => {
                return bad("noise probability must lie in [0, 1]".into())
            }
            _ => {}
        }
        if self.ansatz == AnsatzChoice::QaoaTemplate && self.algo != Algo::Qaoa {
            return bad("the QAOA template needs a max-cut problem".into());
        }
        self.weights.validate()?;
        self.search_config(self.seeds[0], self.capacity, self.layers)
            .validate()
    }

    fn search_config(&self, seed: u64, capacity: usize, layers: usize) -> SearchConfig {
        SearchConfig {
            seed,
            capacity,
            max_layers: layers,
            ..self.search.clone()
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub study: String,
    pub algo: String,
    pub n: usize,
    pub m: usize,
    pub layers: usize,
    pub seed: u64,
    pub performance: f64,
    pub overhead: f64,
    pub fragment_executions: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    /// `(row index, reason)` for rows whose run failed; those rows carry NaN metrics.
    pub failures: Vec<(usize, String)>,
    /// The ansatz behind each row, where one was searched or generated.
    pub ansatz: Vec<Option<AnsatzSpec>>,
}

impl BenchOutput {
    pub fn to_csv(&self) -> Result<String> {
        rows_to_csv(&self.rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

pub fn rows_to_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record([
            "study",
            "algo",
            "n",
            "m",
            "layers",
            "seed",
            "performance",
            "overhead",
            "fragment_executions",
            "wall_time_s",
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serde(e.to_string()))
}

/// The CSV with its trailing wall-time column removed, for reproducibility comparisons.
pub fn csv_without_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

struct Outcome {
    rows: Vec<BenchRow>,
    failures: Vec<(usize, String)>,
    ansatz: Vec<Option<AnsatzSpec>>,
}

/// Performance, overhead, fragment executions and the ansatz of one row.
type Metrics = (f64, f64, u64, Option<AnsatzSpec>);

struct RowCtx<'a> {
    study: String,
    cfg: &'a ExperimentConfig,
    n: usize,
    m: usize,
    layers: usize,
    seed: u64,
}

impl RowCtx<'_> {
    fn row(
        &self,
        performance: f64,
        overhead: f64,
        fragment_executions: u64,
        wall: f64,
    ) -> BenchRow {
        BenchRow {
            study: self.study.clone(),
            algo: self.cfg.algo.name().to_string(),
            n: self.n,
            m: self.m,
            layers: self.layers,
            seed: self.seed,
            performance,
            overhead,
            fragment_executions,
            wall_time_s: wall,
        }
    }

    fn push<T>(
        &self,
        out: &mut Outcome,
        start: Instant,
        result: Result<T>,
        ok: impl FnOnce(&T) -> Metrics,
    ) -> Option<T> {
        let wall = start.elapsed().as_secs_f64();
        match result {
            Ok(v) => {
                let (p, h, e, spec) = ok(&v);
                out.rows.push(self.row(p, h, e, wall));
                out.ansatz.push(spec);
                Some(v)
            }
            Err(e) => {
                out.failures.push((out.rows.len(), e.to_string()));
                out.rows.push(self.row(f64::NAN, f64::NAN, 0, wall));
                out.ansatz.push(None);
                None
            }
        }
    }
}

fn problem_for(
    cfg: &ExperimentConfig,
    seed: u64,
    vqe: Option<&ProblemInstance>,
) -> Result<ProblemInstance> {
    match cfg.algo {
        Algo::Qaoa => ProblemInstance::maxcut(gen_regular_graph(cfg.n, cfg.d, seed)?),
        Algo::Vqe => Ok(vqe.expect("VQE problem prepared").clone()),
    }
}

/// Circuit, knit program and overhead for an ansatz spec at a capacity.
fn knit_spec(
    spec: &AnsatzSpec,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(Circuit, KnitProgram, f64)> {
    let c = build_ansatz(spec, n)?;
    let plan = plan_circuit(&c, m, seed)?;
    let h = sampling_overhead(&plan);
    let prog = cut_circuit(&c, &plan)?;
    Ok((c, prog, h))
}

/// Performance at `theta`, exactly or from a seeded Monte Carlo estimate.
fn measured(
    cfg: &ExperimentConfig,
    problem: &ProblemInstance,
    prog: &KnitProgram,
    theta: &[f64],
    seed: u64,
    exact: f64,
) -> Result<f64> {
    match cfg.mode {
        EvalMode::Exact => Ok(exact),
        EvalMode::Sampled => {
            let est = reconstruct_sampled(prog, problem.observable(), theta, cfg.shots, seed)?;
            Ok(problem.performance(problem.loss_from_expectation(est.estimate)))
        }
    }
}

fn searched(
    cfg: &ExperimentConfig,
    problem: &ProblemInstance,
    sc: &SearchConfig,
    w: &FitnessWeights,
) -> Result<(Candidate, f64, u64)> {
    let report = search(problem, w, sc)?;
    let best = report.best;
    let (_, prog, _) = knit_spec(&best.spec, problem.n(), sc.capacity, best.seed)?;
    let perf = measured(
        cfg,
        problem,
        &prog,
        &best.theta,
        best.seed,
        best.performance,
    )?;
    Ok((best, perf, report.fragment_executions))
}

/// Builds and trains the non-searched ansatz of the train and noise studies.
/// Trained program, parameters, performance, overhead, fragment executions and the spec
/// (absent for the template).
type Trained = (KnitProgram, Vec<f64>, f64, f64, u64, Option<AnsatzSpec>);

fn fixed_ansatz(cfg: &ExperimentConfig, problem: &ProblemInstance, seed: u64) -> Result<Trained> {
    let n = problem.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (circuit, spec) = match (cfg.ansatz, problem) {
        (AnsatzChoice::QaoaTemplate, ProblemInstance::MaxCut { graph, .. }) => {
            (qaoa_template(graph, cfg.layers)?, None)
        }
        (AnsatzChoice::Searched, _) => {
            let sc = cfg.search_config(seed, cfg.capacity, cfg.layers);
            let best = search(problem, &cfg.weights, &sc)?.best;
            let (_, prog, h) = knit_spec(&best.spec, n, cfg.capacity, best.seed)?;
            return Ok((
                prog,
                best.theta,
                best.performance,
                h,
                best.fragment_executions,
                Some(best.spec),
            ));
        }
        _ => {
            let sc = cfg.search_config(seed, cfg.capacity, cfg.layers);
            let spec = AnsatzSpec::new(
                (0..cfg.layers)
                    .map(|_| random_layer(n, &sc, &mut rng))
                    .collect(),
            );
            (build_ansatz(&spec, n)?, Some(spec))
        }
    };
    let plan = plan_circuit(&circuit, cfg.capacity, seed)?;
    let h = sampling_overhead(&plan);
    let prog = cut_circuit(&circuit, &plan)?;
    let theta0: Vec<f64> = (0..circuit.num_params())
        .map(|_| rng.gen_range(-PI..PI))
        .collect();
    let report = train_subcircuit(&prog, problem, &theta0, &cfg.train)?;
    Ok((
        prog,
        report.theta_star,
        report.performance,
        h,
        report.fragment_executions,
        spec,
    ))
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, vqe: Option<&ProblemInstance>) -> Outcome {
    let mut out = Outcome {
        rows: Vec::new(),
        failures: Vec::new(),
        ansatz: Vec::new(),
    };
    let problem = match problem_for(cfg, seed, vqe) {
        Ok(p) => p,
        Err(e) => {
            let ctx = RowCtx {
                study: cfg.study.name().into(),
                cfg,
                n: cfg.n,
                m: cfg.capacity,
                layers: cfg.layers,
                seed,
            };
            ctx.push::<()>(&mut out, Instant::now(), Err(e), |_| unreachable!());
            return out;
        }
    };
    let n = problem.n();
    let ctx = |study: String, m: usize, layers: usize| RowCtx {
        study,
        cfg,
        n,
        m,
        layers,
        seed,
    };
    let search_metrics = |r: &(Candidate, f64, u64)| (r.1, r.0.h, r.2, Some(r.0.spec.clone()));

    match cfg.study {
        Study::Search => {
            let start = Instant::now();
            let sc = cfg.search_config(seed, cfg.capacity, cfg.layers);
            let res = searched(cfg, &problem, &sc, &cfg.weights);
            ctx("search".into(), cfg.capacity, cfg.layers).push(
                &mut out,
                start,
                res,
                search_metrics,
            );
        }
        Study::Train => {
            let start = Instant::now();
            let res = fixed_ansatz(cfg, &problem, seed);
            let c = ctx("train".into(), cfg.capacity, cfg.layers);
            c.push(&mut out, start, res, |r| (r.2, r.3, r.4, r.5.clone()));
        }
        Study::CapacitySweep | Study::LayerSweep => {
            // Later points start from the best ansatz of every earlier point.
            let mut warm: Vec<AnsatzSpec> = Vec::new();
            let points: Vec<(usize, usize)> = if cfg.study == Study::CapacitySweep {
                cfg.capacities.iter().map(|&m| (m, cfg.layers)).collect()
            } else {
                cfg.layer_values
                    .iter()
                    .map(|&l| (cfg.capacity, l))
                    .collect()
            };
            for (m, layers) in points {
                let start = Instant::now();
                let mut sc = cfg.search_config(seed, m, layers);
                sc.initial_population = warm
                    .iter()
                    .filter(|s| s.depth() <= layers)
                    .cloned()
                    .collect();
                let res = searched(cfg, &problem, &sc, &cfg.weights);
                if let Some((best, _, _)) = ctx(cfg.study.name().into(), m, layers).push(
                    &mut out,
                    start,
                    res,
                    search_metrics,
                ) {
                    if !warm.contains(&best.spec) {
                        warm.push(best.spec);
                    }
                }
            }
        }
        Study::WeightSweep => {
            for &w_g in &cfg.w_g_values {
                let start = Instant::now();
                let w = FitnessWeights {
                    w_g,
                    w_h: 1.0 - w_g,
                    ..cfg.weights
                };
                let sc = cfg.search_config(seed, cfg.capacity, cfg.layers);
                let res = w.validate().and_then(|_| searched(cfg, &problem, &sc, &w));
                ctx(format!("weight-sweep/w_g={w_g}"), cfg.capacity, cfg.layers).push(
                    &mut out,
                    start,
                    res,
                    search_metrics,
                );
            }
        }
        Study::Noise => {
            let start = Instant::now();
            let trained = fixed_ansatz(cfg, &problem, seed);
            let Some((prog, theta, _, h, _, spec)) = ctx(
                "noise/none".into(),
                cfg.capacity,
                cfg.layers,
            )
            .push(&mut out, start, trained, |r| (r.2, r.3, r.4, r.5.clone())) else {
                return out;
            };
            let l = prog.fragment_count() as u64;
            for &kind in &cfg.noise.kinds {
                let start = Instant::now();
                let res = NoiseChannel::new(kind, cfg.noise.probability)
                    .and_then(|ch| LossEngine::new(&prog, &problem, Backend::Density(Some(ch))))
                    .and_then(|engine| engine.loss(&theta))
                    .map(|loss| problem.performance(loss));
                ctx(format!("noise/{}", kind.name()), cfg.capacity, cfg.layers).push(
                    &mut out,
                    start,
                    res,
                    |p| (*p, h, l, spec.clone()),
                );
            }
        }
    }
    out
}

/// Runs the configured study for every seed (in parallel) and returns rows in seed order.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<BenchOutput> {
    config.validate()?;
    let vqe = match config.algo {
        Algo::Vqe => {
            let h = match &config.hamiltonian {
                Some(p) => load_hamiltonian(p)?,
                None => h2_hamiltonian(),
            };
            Some(ProblemInstance::vqe(h)?)
        }
        Algo::Qaoa => None,
    };
    let outcomes: Vec<Outcome> = config
        .seeds
        .par_iter()
        .map(|&s| run_seed(config, s, vqe.as_ref()))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut ansatz = Vec::new();
    for o in outcomes {
        let base = rows.len();
        failures.extend(o.failures.into_iter().map(|(i, m)| (base + i, m)));
        rows.extend(o.rows);
        ansatz.extend(o.ansatz);
    }
    Ok(BenchOutput {
        rows,
        failures,
        ansatz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            n: 4,
            d: 2,
            capacity: 2,
            layers: 1,
            seeds: vec![3, 1],
            search: SearchConfig {
                population_size: 3,
                max_iterations: 2,
                train: TrainConfig {
                    max_iter: 20,
                    ..TrainConfig::default()
                },
                ..SearchConfig::default()
            },
            train: TrainConfig {
                max_iter: 20,
                ..TrainConfig::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_round_trip() {
        let c = tiny();
        let text = c.to_json().unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn rows_follow_seed_order_and_repeat() {
        let cfg = tiny();
        let a = run_benchmark(&cfg).unwrap();
        assert!(a.failures.is_empty(), "{:?}", a.failures);
        assert_eq!(
            a.rows.iter().map(|r| r.seed).collect::<Vec<_>>(),
            vec![3, 1]
        );
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(
            csv_without_wall_time(&a.to_csv().unwrap()),
            csv_without_wall_time(&b.to_csv().unwrap())
        );
        assert!(a.to_csv().unwrap().starts_with(
            "study,algo,n,m,layers,seed,performance,overhead,fragment_executions,wall_time_s\n"
        ));
    }

    #[test]
    fn failing_rows_are_recorded() {
        let cfg = ExperimentConfig {
            study: Study::Train,
            ansatz: AnsatzChoice::QaoaTemplate,
            layers: 3,
            capacity: 1,
            ..tiny()
        };
        let out = run_benchmark(&cfg).unwrap();
        assert_eq!(out.failures.len(), 2);
        assert!(out.rows.iter().all(|r| r.performance.is_nan()));
    }

    #[test]
    fn invalid_configs() {
        assert!(run_benchmark(&ExperimentConfig {
            seeds: vec![],
            ..tiny()
        })
        .is_err());
        assert!(run_benchmark(&ExperimentConfig {
            algo: Algo::Vqe,
            ansatz: AnsatzChoice::QaoaTemplate,
            ..tiny()
        })
        .is_err());
        assert!("bogus".parse::<Study>().is_err());
        assert_eq!(
            "capacity-sweep".parse::<Study>().unwrap(),
            Study::CapacitySweep
        );
    }
}
