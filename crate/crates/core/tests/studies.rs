use knitvqa::bench::{run_benchmark, Algo, BenchRow, ExperimentConfig, Study};
use knitvqa::qas::SearchConfig;
use knitvqa::vqa::TrainConfig;

fn seed_mean(rows: &[BenchRow], study: &str, field: fn(&BenchRow) -> f64) -> f64 {
    let v: Vec<f64> = rows.iter().filter(|r| r.study == study).map(field).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn weight_sweep_trades_overhead_for_performance() {
    let cfg = ExperimentConfig {
        study: Study::WeightSweep,
        n: 6,
        capacity: 3,
        layers: 2,
        seeds: (0..4).collect(),
        w_g_values: vec![0.1, 1.0],
        search: SearchConfig { population_size: 6, max_iterations: 4, ..SearchConfig::default() },
        ..ExperimentConfig::default()
    };
    let out = run_benchmark(&cfg).unwrap();
    assert!(out.failures.is_empty(), "{:?}", out.failures);
    let (lo, hi) = ("weight-sweep/w_g=0.1", "weight-sweep/w_g=1");
    let h = |r: &BenchRow| r.overhead;
    let r = |r: &BenchRow| r.performance;
    assert!(seed_mean(&out.rows, hi, h) >= seed_mean(&out.rows, lo, h));
    assert!(seed_mean(&out.rows, hi, r) >= seed_mean(&out.rows, lo, r) - 1e-9);
}

#[test]
fn vqe_error_shrinks_with_depth() {
    let cfg = ExperimentConfig {
        study: Study::LayerSweep,
        algo: Algo::Vqe,
        capacity: 2,
        seeds: (0..5).collect(),
        layer_values: vec![1, 2, 3],
        search: SearchConfig {
            population_size: 6,
            max_iterations: 4,
            train: TrainConfig { max_iter: 400, tol: 1e-10, step: 0.2 },
            ..SearchConfig::default()
        },
        ..ExperimentConfig::default()
    };
    let out = run_benchmark(&cfg).unwrap();
    assert!(out.failures.is_empty(), "{:?}", out.failures);
    for seed in &cfg.seeds {
        let deltas: Vec<f64> = out.rows.iter().filter(|r| r.seed == *seed).map(|r| r.performance).collect();
        assert_eq!(deltas.len(), 3);
        assert!(deltas.windows(2).all(|w| w[1] <= w[0] + 1e-6), "seed {seed}: {deltas:?}");
    }
}
