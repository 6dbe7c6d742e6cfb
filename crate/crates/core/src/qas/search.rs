use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_ansatz, AnsatzSpec, GateKind, Layer, Placement};
use crate::error::{Error, Result};
use crate::knit::{cut_circuit, plan_circuit, sampling_overhead};
use crate::vqa::{param_fragment_index, train_subcircuit, ProblemInstance, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    pub w_g: f64,
    pub w_h: f64,
    #[serde(default)]
    pub w_i: f64,
    /// Candidates with a raw overhead above this are discarded untrained.
    pub eta: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        FitnessWeights {
            w_g: 0.5,
            w_h: 0.5,
            w_i: 0.0,
            eta: 9f64.powi(4),
        }
    }
}

impl FitnessWeights {
    /// Weights with the fragment-locality penalty switched on.
    pub fn with_locality() -> Self {
        FitnessWeights {
            w_g: 0.4,
            w_h: 0.4,
            w_i: 0.2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ws = [self.w_g, self.w_h, self.w_i];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) || ws.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "weights must be non-negative with a positive sum, got {ws:?}"
            )));
        }
        if self.eta.is_nan() || self.eta < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "eta must be at least 1, got {}",
                self.eta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub spec: AnsatzSpec,
    /// Seed used for partitioning and the initial parameters.
    pub seed: u64,
    pub cuts: usize,
    /// Sampling overhead `9^cuts`.
    pub h: f64,
    /// Performance loss (`1 - r` or `delta`); infinite when untrained or diverged.
    pub g: f64,
    /// Mean fraction of fragments a parameter touches.
    pub locality: f64,
    pub f: f64,
    pub evaluated: bool,
    /// `r` or `delta` at `theta`.
    pub performance: f64,
    pub theta: Vec<f64>,
    pub fragment_executions: u64,
}

/// `w_g g + w_h log9(h) + w_i I`, or infinity above the threshold.
pub fn fitness(cand: &Candidate, w: &FitnessWeights) -> f64 {
    if cand.h > w.eta {
        return f64::INFINITY;
    }
    w.w_g * cand.g + w.w_h * cand.h.log(9.0) + w.w_i * cand.locality
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    /// Mutations drawn per survivor when refilling.
    pub branching: usize,
    /// Mutations kept per survivor after the random-subset step.
    pub expansion_subset_size: usize,
    pub train: TrainConfig,
    /// Independent training starts per candidate; the best is kept.
    pub restarts: usize,
    pub seed: u64,
    /// Device capacity in qubits.
    pub capacity: usize,
    pub max_layers: usize,
    pub single_kinds: Vec<GateKind>,
    pub two_kinds: Vec<GateKind>,
    /// Specs placed in the first population before random fill.
    pub initial_population: Vec<AnsatzSpec>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population_size: 8,
            max_iterations: 5,
            branching: 4,
            expansion_subset_size: 2,
            train: TrainConfig {
                max_iter: 200,
                ..TrainConfig::default()
            },
            restarts: 1,
            seed: 0,
            capacity: 3,
            max_layers: 3,
            single_kinds: GateKind::SINGLE_ROTATIONS.to_vec(),
            two_kinds: GateKind::TWO_QUBIT.to_vec(),
            initial_population: Vec::new(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("population_size", self.population_size),
            ("max_iterations", self.max_iterations),
            ("branching", self.branching),
            ("expansion_subset_size", self.expansion_subset_size),
            ("restarts", self.restarts),
            ("capacity", self.capacity),
            ("max_layers", self.max_layers),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
        }
        if self.expansion_subset_size > self.branching {
            return Err(Error::InvalidConfig(
                "expansion_subset_size exceeds branching".into(),
            ));
        }
        if self.single_kinds.is_empty() || self.single_kinds.iter().any(|k| !k.is_rotation()) {
            return Err(Error::InvalidConfig(
                "single_kinds must be non-empty rotation kinds".into(),
            ));
        }
        if self.two_kinds.is_empty() || self.two_kinds.iter().any(|k| k.arity() != 2) {
            return Err(Error::InvalidConfig(
                "two_kinds must be non-empty two-qubit kinds".into(),
            ));
        }
        if self
            .initial_population
            .iter()
            .any(|s| s.depth() == 0 || s.depth() > self.max_layers)
        {
            return Err(Error::InvalidConfig(
                "initial spec depth outside 1..=max_layers".into(),
            ));
        }
        Ok(())
    }
}

/// A seed derived from `base` and two indices, stable across platforms.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(a << 32 | (b & 0xffff_ffff));
    rng.next_u64()
}

/// A layer with a random rotation per qubit and a random kind on each neighbouring pair.
pub fn random_layer(n: usize, config: &SearchConfig, rng: &mut impl Rng) -> Layer {
    Layer {
        rotations: (0..n)
            .map(|_| *config.single_kinds.choose(rng).expect("non-empty"))
            .collect(),
        placements: (0..n.saturating_sub(1))
            .map(|i| Placement {
                kind: *config.two_kinds.choose(rng).expect("non-empty"),
                control: i,
                target: i + 1,
            })
            .collect(),
    }
}

pub fn random_spec(n: usize, config: &SearchConfig, rng: &mut impl Rng) -> AnsatzSpec {
    let depth = rng.gen_range(1..=config.max_layers);
    AnsatzSpec::new((0..depth).map(|_| random_layer(n, config, rng)).collect())
}

/// One uniformly chosen mutation: swap a rotation kind, switch a placement's kind, or
/// append a layer. Mutations that cannot apply are redrawn.
pub fn mutate(
    spec: &AnsatzSpec,
    n: usize,
    config: &SearchConfig,
    rng: &mut impl Rng,
) -> AnsatzSpec {
    let mut out = spec.clone();
    for _ in 0..16 {
        match rng.gen_range(0..3) {
            0 if config.single_kinds.len() > 1 && n > 0 => {
                let layer = &mut out.layers[rng.gen_range(0..spec.depth())];
                let q = rng.gen_range(0..layer.rotations.len());
                let current = layer.rotations[q];
                let options: Vec<GateKind> = config
                    .single_kinds
                    .iter()
                    .copied()
                    .filter(|k| *k != current)
                    .collect();
                layer.rotations[q] = *options.choose(rng).expect("non-empty");
                return out;
            }
            1 if config.two_kinds.len() > 1 && n > 1 => {
                let layer = &mut out.layers[rng.gen_range(0..spec.depth())];
                if layer.placements.is_empty() {
                    continue;
                }
                let i = rng.gen_range(0..layer.placements.len());
                let current = layer.placements[i].kind;
                let options: Vec<GateKind> = config
                    .two_kinds
                    .iter()
                    .copied()
                    .filter(|k| *k != current)
                    .collect();
                layer.placements[i].kind = *options.choose(rng).expect("non-empty");
                return out;
            }
            2 if spec.depth() < config.max_layers => {
                out.layers.push(random_layer(n, config, rng));
                return out;
            }
            _ => {}
        }
    }
    out
}

/// Uniform sample of `size` items without replacement, in their original order.
pub fn prune_random_subset<T: Clone>(candidates: &[T], size: usize, seed: u64) -> Result<Vec<T>> {
    if size == 0 {
        return Err(Error::InvalidConfig(
            "subset size must be at least 1".into(),
        ));
    }
    if size >= candidates.len() {
        return Ok(candidates.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, candidates.len(), size).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| candidates[i].clone()).collect())
}

/// Partitions the ansatz; trains it only if the overhead passes the threshold.
pub fn evaluate_candidate(
    spec: &AnsatzSpec,
    problem: &ProblemInstance,
    weights: &FitnessWeights,
    config: &SearchConfig,
    seed: u64,
) -> Result<Candidate> {
    let n = problem.n();
    let circuit = build_ansatz(spec, n)?;
    let plan = plan_circuit(&circuit, config.capacity, seed)?;
    let h = sampling_overhead(&plan);
    let mut cand = Candidate {
        spec: spec.clone(),
        seed,
        cuts: plan.costly_cuts(),
        h,
        g: f64::INFINITY,
        locality: 0.0,
        f: f64::INFINITY,
        evaluated: false,
        performance: f64::NAN,
        theta: Vec::new(),
        fragment_executions: 0,
    };
    if h > weights.eta {
        return Ok(cand);
    }
    let prog = cut_circuit(&circuit, &plan)?;
    cand.locality = param_fragment_index(&prog).locality;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..config.restarts {
        let theta0: Vec<f64> = (0..circuit.num_params())
            .map(|_| rng.gen_range(-PI..PI))
            .collect();
        match train_subcircuit(&prog, problem, &theta0, &config.train) {
            Ok(report) => {
                cand.fragment_executions += report.fragment_executions;
                let g = problem.performance_loss(report.final_loss);
                if !cand.evaluated || g < cand.g {
                    cand.g = g;
                    cand.performance = report.performance;
                    cand.theta = report.theta_star;
                }
                cand.evaluated = true;
            }
            Err(Error::Diverged { .. }) => cand.evaluated = true,
            Err(e) => return Err(e),
        }
    }
    cand.f = fitness(&cand, weights);
    Ok(cand)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iter: usize,
    pub best_f: f64,
    pub best_g: f64,
    pub best_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub best: Candidate,
    /// Best-so-far after each iteration.
    pub history: Vec<HistoryRow>,
    /// Candidates that were trained.
    pub evaluations: usize,
    /// Candidates discarded by the overhead threshold.
    pub pruned: usize,
    pub fragment_executions: u64,
    pub wall_time: f64,
}

impl SearchReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `iter,best_f,best_g,best_h` rows.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iter,best_f,best_g,best_h\n");
        for r in &self.history {
            let _ = writeln!(out, "{},{},{},{}", r.iter, r.best_f, r.best_g, r.best_h);
        }
        out
    }
}

fn ranks_before(a: &Candidate, b: &Candidate) -> bool {
    a.f < b.f || (a.f == b.f && a.spec < b.spec)
}

/// Evolves a population for `max_iterations` rounds and returns the lowest-fitness
/// candidate seen.
pub fn search(
    problem: &ProblemInstance,
    weights: &FitnessWeights,
    config: &SearchConfig,
) -> Result<SearchReport> {
    weights.validate()?;
    config.validate()?;
    let start = Instant::now();
    let n = problem.n();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut seen: BTreeMap<AnsatzSpec, Candidate> = BTreeMap::new();
    let mut population: Vec<AnsatzSpec> = Vec::with_capacity(config.population_size);
    for s in &config.initial_population {
        if population.len() < config.population_size && !population.contains(s) {
            population.push(s.clone());
        }
    }
    let mut attempts = 0;
    while population.len() < config.population_size && attempts < 64 * config.population_size {
        let s = random_spec(n, config, &mut rng);
        if !population.contains(&s) {
            population.push(s);
        }
        attempts += 1;
    }

    let mut best: Option<Candidate> = None;
    let mut history = Vec::with_capacity(config.max_iterations);
    for iter in 0..config.max_iterations {
        let fresh: Vec<(usize, AnsatzSpec)> = population
            .iter()
            .enumerate()
            .filter(|(_, s)| !seen.contains_key(*s))
            .map(|(i, s)| (i, s.clone()))
            .collect();
        let scored: Vec<Candidate> = fresh
            .par_iter()
            .map(|(i, s)| {
                evaluate_candidate(
                    s,
                    problem,
                    weights,
                    config,
                    derive_seed(config.seed, iter as u64, *i as u64),
                )
            })
            .collect::<Result<_>>()?;
        for c in scored {
            seen.insert(c.spec.clone(), c);
        }
        let mut ranked: Vec<&Candidate> = population.iter().map(|s| &seen[s]).collect();
        ranked.sort_by(|a, b| a.f.total_cmp(&b.f).then_with(|| a.spec.cmp(&b.spec)));
        if let Some(top) = ranked.first() {
            if best.as_ref().is_none_or(|b| ranks_before(top, b)) {
                best = Some((*top).clone());
            }
        }
        let b = best.as_ref().expect("population is non-empty");
        history.push(HistoryRow {
            iter,
            best_f: b.f,
            best_g: b.g,
            best_h: b.h,
        });
        if iter + 1 == config.max_iterations {
            break;
        }

        let keep = config.population_size.div_ceil(2).min(ranked.len());
        let survivors: Vec<AnsatzSpec> = ranked[..keep].iter().map(|c| c.spec.clone()).collect();
        let mut next = survivors.clone();
        'refill: for round in 0..4 {
            for (p, parent) in survivors.iter().enumerate() {
                let mut kids: Vec<AnsatzSpec> = Vec::new();
                for _ in 0..config.branching {
                    let kid = mutate(parent, n, config, &mut rng);
                    if !next.contains(&kid) && !kids.contains(&kid) {
                        kids.push(kid);
                    }
                }
                if kids.is_empty() {
                    continue;
                }
                let subset_seed = derive_seed(
                    config.seed ^ 0x5eed,
                    iter as u64,
                    (round * survivors.len() + p) as u64,
                );
                for kid in prune_random_subset(&kids, config.expansion_subset_size, subset_seed)? {
                    if next.len() == config.population_size {
                        break 'refill;
                    }
                    next.push(kid);
                }
            }
        }
        let mut attempts = 0;
        while next.len() < config.population_size && attempts < 64 * config.population_size {
            let s = random_spec(n, config, &mut rng);
            if !next.contains(&s) {
                next.push(s);
            }
            attempts += 1;
        }
        population = next;
    }

    let best = best.expect("at least one iteration ran");
    if !best.f.is_finite() {
        return Err(Error::EmptyFeasibleSpace { eta: weights.eta });
    }
    Ok(SearchReport {
        best,
        history,
        evaluations: seen.values().filter(|c| c.evaluated).count(),
        pruned: seen.values().filter(|c| c.h > weights.eta).count(),
        fragment_executions: seen.values().map(|c| c.fragment_executions).sum(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knit::WeightedGraph;

    fn cand(g: f64, h: f64) -> Candidate {
        Candidate {
            spec: AnsatzSpec::new(vec![]),
            seed: 0,
            cuts: 0,
            h,
            g,
            locality: 0.5,
            f: 0.0,
            evaluated: true,
            performance: 0.0,
            theta: vec![],
            fragment_executions: 0,
        }
    }

    #[test]
    fn fitness_values() {
        let w = FitnessWeights {
            w_g: 1.0,
            w_h: 0.0,
            w_i: 0.0,
            eta: 9.0,
        };
        assert_eq!(fitness(&cand(0.2, 1.0), &w), 0.2);
        assert_eq!(fitness(&cand(0.2, 81.0), &w), f64::INFINITY);
        let w = FitnessWeights::default();
        assert!((fitness(&cand(0.2, 9.0), &w) - 0.6).abs() < 1e-15);
        let w = FitnessWeights::with_locality();
        assert!((fitness(&cand(0.0, 1.0), &w) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn weight_validation() {
        assert!(FitnessWeights {
            w_g: 0.0,
            w_h: 0.0,
            w_i: 0.0,
            eta: 9.0
        }
        .validate()
        .is_err());
        assert!(FitnessWeights {
            eta: 0.5,
            ..FitnessWeights::default()
        }
        .validate()
        .is_err());
        assert!(FitnessWeights::default().validate().is_ok());
    }

    #[test]
    fn subset_edges() {
        let items: Vec<u32> = (0..10).collect();
        assert_eq!(prune_random_subset(&items, 10, 1).unwrap(), items);
        assert_eq!(prune_random_subset(&items, 50, 1).unwrap(), items);
        let a = prune_random_subset(&items, 1, 42).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a, prune_random_subset(&items, 1, 42).unwrap());
        assert!(prune_random_subset(&items, 0, 1).is_err());
    }

    #[test]
    fn over_threshold_candidate_is_not_trained() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let problem = ProblemInstance::maxcut(g).unwrap();
        let layer = Layer {
            rotations: vec![GateKind::Ry; 4],
            placements: (0..3)
                .map(|i| Placement {
                    kind: GateKind::Cz,
                    control: i,
                    target: i + 1,
                })
                .collect(),
        };
        let spec = AnsatzSpec::new(vec![layer.clone(), layer]);
        let config = SearchConfig {
            capacity: 2,
            ..SearchConfig::default()
        };
        let w = FitnessWeights {
            eta: 9.0,
            ..FitnessWeights::default()
        };
        let c = evaluate_candidate(&spec, &problem, &w, &config, 3).unwrap();
        assert_eq!(c.cuts, 2);
        assert!(!c.evaluated);
        assert_eq!(c.fragment_executions, 0);
        assert_eq!(c.f, f64::INFINITY);
    }

    #[test]
    fn mutation_changes_one_thing() {
        let config = SearchConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = random_spec(4, &config, &mut rng);
            let m = mutate(&s, 4, &config, &mut rng);
            assert_ne!(s, m);
            if m.depth() == s.depth() {
                let diffs: usize = s
                    .layers
                    .iter()
                    .zip(&m.layers)
                    .map(|(a, b)| {
                        a.rotations
                            .iter()
                            .zip(&b.rotations)
                            .filter(|(x, y)| x != y)
                            .count()
                            + a.placements
                                .iter()
                                .zip(&b.placements)
                                .filter(|(x, y)| x != y)
                                .count()
                    })
                    .sum();
                assert_eq!(diffs, 1);
            } else {
                assert_eq!(m.depth(), s.depth() + 1);
                assert_eq!(&m.layers[..s.depth()], &s.layers[..]);
            }
        }
    }

    #[test]
    fn search_is_deterministic_and_monotone() {
        let g =
            WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let problem = ProblemInstance::maxcut(g).unwrap();
        let config = SearchConfig {
            population_size: 4,
            max_iterations: 3,
            capacity: 2,
            max_layers: 2,
            seed: 11,
            train: TrainConfig {
                max_iter: 40,
                ..TrainConfig::default()
            },
            ..SearchConfig::default()
        };
        let w = FitnessWeights::default();
        let a = search(&problem, &w, &config).unwrap();
        let b = search(&problem, &w, &config).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.history_csv(), b.history_csv());
        assert!(a.history.windows(2).all(|p| p[1].best_f <= p[0].best_f));
        let again = evaluate_candidate(&a.best.spec, &problem, &w, &config, a.best.seed).unwrap();
        assert!((again.g - a.best.g).abs() < 1e-12);
    }

    #[test]
    fn single_member_search_equals_evaluation() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let problem = ProblemInstance::maxcut(g).unwrap();
        let spec = AnsatzSpec::new(vec![Layer {
            rotations: vec![GateKind::Ry; 2],
            placements: vec![],
        }]);
        let config = SearchConfig {
            population_size: 1,
            max_iterations: 1,
            capacity: 2,
            max_layers: 1,
            initial_population: vec![spec.clone()],
            ..SearchConfig::default()
        };
        let w = FitnessWeights::default();
        let r = search(&problem, &w, &config).unwrap();
        let c = evaluate_candidate(&spec, &problem, &w, &config, derive_seed(config.seed, 0, 0))
            .unwrap();
        assert_eq!(r.best, c);
    }
}
