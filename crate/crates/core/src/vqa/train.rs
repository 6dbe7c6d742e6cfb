use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::ProblemInstance;
use crate::error::{Error, Result};
use crate::knit::{check_exact, Backend, FragmentTable, KnitEvaluator, KnitProgram};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_iter: usize,
    /// Stop once consecutive losses differ by less than this.
    pub tol: f64,
    pub step: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iter: 500,
            tol: 1e-6,
            step: 0.05,
        }
    }
}

/// Which fragments a shifted gradient evaluation re-simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientMode {
    /// Only the fragments that contain the parameter; the rest come from the iteration cache.
    Subcircuit,
    /// Every fragment, for every shifted evaluation.
    Full,
}

/// Parameter-to-fragment bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamIndex {
    pub fragments: BTreeMap<usize, BTreeSet<usize>>,
    /// Number of fragments containing each slot.
    pub counts: Vec<usize>,
    pub fragment_count: usize,
    /// Mean over slots of `count / fragment_count`.
    pub locality: f64,
}

pub fn param_fragment_index(prog: &KnitProgram) -> ParamIndex {
    let fragments = prog.param_map().clone();
    let counts: Vec<usize> = (0..prog.num_params())
        .map(|s| fragments.get(&s).map_or(0, BTreeSet::len))
        .collect();
    let l = prog.fragment_count().max(1) as f64;
    let locality = if counts.is_empty() {
        0.0
    } else {
        counts.iter().map(|&k| k as f64 / l).sum::<f64>() / counts.len() as f64
    };
    ParamIndex {
        fragments,
        counts,
        fragment_count: prog.fragment_count(),
        locality,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub theta_star: Vec<f64>,
    pub loss_history: Vec<f64>,
    pub final_loss: f64,
    /// `r` for Max-Cut, `delta` for VQE, at `theta_star`.
    pub performance: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Every fragment simulation, loss evaluations included.
    pub fragment_executions: u64,
    /// Fragment simulations spent on each parameter's gradient component.
    pub gradient_executions: Vec<u64>,
    pub wall_time: f64,
}

impl TrainReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `iter,loss` rows.
    pub fn loss_csv(&self) -> String {
        let mut out = String::from("iter,loss\n");
        for (i, l) in self.loss_history.iter().enumerate() {
            let _ = writeln!(out, "{i},{l}");
        }
        out
    }
}

/// Loss and gradients of a problem over one knit program.
pub struct LossEngine<'a> {
    eval: KnitEvaluator<'a>,
    problem: &'a ProblemInstance,
    /// Per slot, every occurrence as `(fragment, local gate index)`.
    occurrences: Vec<Vec<(usize, usize)>>,
}

impl<'a> LossEngine<'a> {
    pub fn new(
        prog: &'a KnitProgram,
        problem: &'a ProblemInstance,
        backend: Backend,
    ) -> Result<Self> {
        check_exact(prog)?;
        let eval = KnitEvaluator::new(prog, problem.observable(), backend)?;
        let mut occurrences = vec![Vec::new(); prog.num_params()];
        for (f, frag) in prog.fragments().iter().enumerate() {
            for (i, g) in frag.circuit.gates().iter().enumerate() {
                if let Some(s) = g.slot() {
                    if !g.kind.is_rotation() {
                        return Err(Error::NonRotationParameter { slot: s });
                    }
                    occurrences[s].push((f, i));
                }
            }
        }
        Ok(LossEngine {
            eval,
            problem,
            occurrences,
        })
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        let p = self.eval.program().num_params();
        if theta.len() != p {
            return Err(Error::ParameterLength {
                expected: p,
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Loss at `theta` plus the fragment tables it was computed from.
    pub fn evaluate(&self, theta: &[f64]) -> Result<(f64, Vec<FragmentTable>)> {
        self.check(theta)?;
        let tables = self.eval.all_tables(theta)?;
        let e = self.eval.combine(&tables.iter().collect::<Vec<_>>())?;
        Ok((self.problem.loss_from_expectation(e), tables))
    }

    pub fn loss(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.evaluate(theta)?.0)
    }

    /// One gradient component by the shift rule, summed over occurrences. Returns the
    /// component and the number of fragment simulations it took.
    fn component(
        &self,
        slot: usize,
        theta: &[f64],
        cache: &[FragmentTable],
        mode: GradientMode,
    ) -> Result<(f64, u64)> {
        let prog = self.eval.program();
        let relevant: Vec<usize> = match mode {
            GradientMode::Subcircuit => prog.param_map()[&slot].iter().copied().collect(),
            GradientMode::Full => (0..prog.fragment_count()).collect(),
        };
        let mut grad = 0.0;
        let mut runs = 0u64;
        for &(f, local) in &self.occurrences[slot] {
            let mut shifted = [0.0; 2];
            for (out, delta) in shifted.iter_mut().zip([FRAC_PI_2, -FRAC_PI_2]) {
                let mut fresh = Vec::with_capacity(relevant.len());
                for &r in &relevant {
                    let shift = (r == f).then_some((local, delta));
                    fresh.push((r, self.eval.fragment_table(r, theta, shift)?));
                    runs += 1;
                }
                let tables: Vec<&FragmentTable> = (0..prog.fragment_count())
                    .map(|i| {
                        fresh
                            .iter()
                            .find(|(r, _)| *r == i)
                            .map_or(&cache[i], |(_, t)| t)
                    })
                    .collect();
                *out = self
                    .problem
                    .loss_from_expectation(self.eval.combine(&tables)?);
            }
            grad += 0.5 * (shifted[0] - shifted[1]);
        }
        Ok((grad, runs))
    }

    /// Full gradient at `theta`, reusing `cache` (the tables at `theta`) for untouched fragments.
    pub fn gradient(
        &self,
        theta: &[f64],
        cache: &[FragmentTable],
        mode: GradientMode,
    ) -> Result<(Vec<f64>, Vec<u64>)> {
        self.check(theta)?;
        let parts: Vec<(f64, u64)> = (0..theta.len())
            .into_par_iter()
            .map(|s| self.component(s, theta, cache, mode))
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().unzip())
    }

    /// Batch gradient descent with the shift-rule gradient.
    pub fn train(
        &self,
        theta0: &[f64],
        config: &TrainConfig,
        mode: GradientMode,
    ) -> Result<TrainReport> {
        let start = Instant::now();
        let l = self.eval.program().fragment_count() as u64;
        let mut theta = theta0.to_vec();
        let (mut loss, mut cache) = self.evaluate(&theta)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { iteration: 0 });
        }
        let mut executions = l;
        let mut per_param = vec![0u64; theta.len()];
        let mut history = vec![loss];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < config.max_iter {
            let (grad, runs) = self.gradient(&theta, &cache, mode)?;
            for ((t, g), (acc, r)) in theta
                .iter_mut()
                .zip(&grad)
                .zip(per_param.iter_mut().zip(&runs))
            {
                *t -= config.step * g;
                *acc += r;
            }
            executions += runs.iter().sum::<u64>();
            let (next, tables) = self.evaluate(&theta)?;
            executions += l;
            iterations += 1;
            if !next.is_finite() {
                return Err(Error::Diverged {
                    iteration: iterations,
                });
            }
            history.push(next);
            cache = tables;
            let change = (next - loss).abs();
            loss = next;
            if change < config.tol {
                converged = true;
                break;
            }
        }
        Ok(TrainReport {
            theta_star: theta,
            final_loss: loss,
            performance: self.problem.performance(loss),
            loss_history: history,
            iterations,
            converged,
            fragment_executions: executions,
            gradient_executions: per_param,
            wall_time: start.elapsed().as_secs_f64(),
        })
    }
}

/// Noiseless loss through exact reconstruction.
pub fn loss(prog: &KnitProgram, problem: &ProblemInstance, theta: &[f64]) -> Result<f64> {
    LossEngine::new(prog, problem, Backend::StateVector)?.loss(theta)
}

pub fn parameter_shift_grad(
    prog: &KnitProgram,
    problem: &ProblemInstance,
    theta: &[f64],
) -> Result<Vec<f64>> {
    let engine = LossEngine::new(prog, problem, Backend::StateVector)?;
    let (_, cache) = engine.evaluate(theta)?;
    Ok(engine.gradient(theta, &cache, GradientMode::Subcircuit)?.0)
}

/// Gradient descent that re-simulates only the fragments holding each parameter.
pub fn train_subcircuit(
    prog: &KnitProgram,
    problem: &ProblemInstance,
    theta0: &[f64],
    config: &TrainConfig,
) -> Result<TrainReport> {
    LossEngine::new(prog, problem, Backend::StateVector)?.train(
        theta0,
        config,
        GradientMode::Subcircuit,
    )
}

/// Baseline gradient descent that re-simulates the whole program per shifted evaluation.
pub fn train_full(
    prog: &KnitProgram,
    problem: &ProblemInstance,
    theta0: &[f64],
    config: &TrainConfig,
) -> Result<TrainReport> {
    LossEngine::new(prog, problem, Backend::StateVector)?.train(theta0, config, GradientMode::Full)
}
