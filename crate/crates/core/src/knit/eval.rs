//! Fragment simulation and recombination of quasiprobability terms.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::program::{Fragment, KnitProgram, Side};
use crate::circuit::{BoundGate, Observable, PauliString};
use crate::error::{Error, Result};
use crate::sim::kernels::{apply_1q, pauli_expectation, pauli_trace, PauliMasks, C64};
use crate::sim::{apply_gate, apply_gate_density, apply_noise, apply_signed_kraus, NoiseChannel};

/// Exact reconstruction enumerates every term combination and is limited to this many cuts.
pub const MAX_EXACT_CUTS: usize = 6;

/// How fragments are simulated.
#[derive(Debug, Clone, Default)]
pub enum Backend {
    #[default]
    StateVector,
    /// Density matrices, with an optional noise channel after every gate and local operation.
    Density(Option<NoiseChannel>),
}

/// Sub-expectations of one fragment: for every term variant (mixed radix over the fragment's
/// insertions) the signed expectation of each restricted Pauli string.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentTable {
    strings: usize,
    values: Vec<f64>,
}

impl FragmentTable {
    pub fn variants(&self) -> usize {
        self.values.len().checked_div(self.strings).unwrap_or(0)
    }

    #[inline]
    pub fn get(&self, variant: usize, string: usize) -> f64 {
        self.values[variant * self.strings + string]
    }
}

/// One fragment simulation: the bound gates and, for single-variant runs, the term per cut.
#[derive(Clone, Copy)]
struct Walk<'w> {
    f: usize,
    frag: &'w Fragment,
    gates: &'w [BoundGate],
    fixed: Option<&'w [usize]>,
}

/// Evaluates a knit program against one observable.
pub struct KnitEvaluator<'a> {
    prog: &'a KnitProgram,
    backend: Backend,
    coeffs: Vec<f64>,
    /// Distinct restricted Pauli masks per fragment.
    masks: Vec<Vec<PauliMasks>>,
    /// `string_index[t][f]`: which of fragment `f`'s strings term `t` restricts to.
    string_index: Vec<Vec<usize>>,
    /// Per fragment, the stride of each insertion in the variant index.
    strides: Vec<Vec<usize>>,
    /// Per fragment, `(cut, stride)` pairs for decoding a global combination.
    cut_strides: Vec<Vec<(usize, usize)>>,
}

impl<'a> KnitEvaluator<'a> {
    pub fn new(prog: &'a KnitProgram, obs: &Observable, backend: Backend) -> Result<Self> {
        if obs.n() != prog.n() {
            return Err(Error::DimensionMismatch {
                expected: prog.n(),
                got: obs.n(),
            });
        }
        let nf = prog.fragment_count();
        let mut strings: Vec<Vec<PauliString>> = vec![Vec::new(); nf];
        let mut string_index = Vec::with_capacity(obs.terms().len());
        for term in obs.terms() {
            let mut idx = Vec::with_capacity(nf);
            for (f, frag) in prog.fragments().iter().enumerate() {
                let r = term.pauli.restrict(&frag.qubits);
                let i = match strings[f].iter().position(|s| *s == r) {
                    Some(i) => i,
                    None => {
                        strings[f].push(r);
                        strings[f].len() - 1
                    }
                };
                idx.push(i);
            }
            string_index.push(idx);
        }
        let masks = strings
            .iter()
            .map(|ss| ss.iter().map(PauliMasks::new).collect())
            .collect();
        let mut strides = Vec::with_capacity(nf);
        let mut cut_strides = Vec::with_capacity(nf);
        for frag in prog.fragments() {
            let counts: Vec<usize> = frag
                .insertions
                .iter()
                .map(|i| prog.term_table()[i.cut].len())
                .collect();
            let mut s = vec![1usize; counts.len()];
            for i in (0..counts.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * counts[i + 1];
            }
            cut_strides.push(
                frag.insertions
                    .iter()
                    .zip(&s)
                    .map(|(ins, &st)| (ins.cut, st))
                    .collect(),
            );
            strides.push(s);
        }
        Ok(KnitEvaluator {
            prog,
            backend,
            coeffs: obs.terms().iter().map(|t| t.coeff).collect(),
            masks,
            string_index,
            strides,
            cut_strides,
        })
    }

    pub fn program(&self) -> &KnitProgram {
        self.prog
    }

    /// Simulates every term variant of fragment `f`. `shift` adds a delta to the angle of
    /// one fragment-local gate.
    pub fn fragment_table(
        &self,
        f: usize,
        theta: &[f64],
        shift: Option<(usize, f64)>,
    ) -> Result<FragmentTable> {
        let inserted = self.prog.fragments()[f].insertions.len();
        if inserted > MAX_EXACT_CUTS {
            return Err(Error::CapacityExceeded {
                what: "cut insertions per fragment table",
                limit: MAX_EXACT_CUTS,
                got: inserted,
            });
        }
        self.simulate(f, theta, shift, None)
    }

    /// Simulates a single variant of fragment `f`, picking term `choice[cut]` at every insertion.
    fn fragment_variant(&self, f: usize, theta: &[f64], choice: &[usize]) -> Result<FragmentTable> {
        self.simulate(f, theta, None, Some(choice))
    }

    fn simulate(
        &self,
        f: usize,
        theta: &[f64],
        shift: Option<(usize, f64)>,
        fixed: Option<&[usize]>,
    ) -> Result<FragmentTable> {
        let frag = &self.prog.fragments()[f];
        let bound = frag.circuit.bind_shifted(theta, shift)?;
        let strings = self.masks[f].len();
        let variants: usize = match fixed {
            Some(_) => 1,
            None => frag
                .insertions
                .iter()
                .map(|i| self.prog.term_table()[i.cut].len())
                .product(),
        };
        let mut values = vec![0.0; variants * strings];
        let width = frag.width();
        let walk = Walk {
            f,
            frag,
            gates: bound.gates(),
            fixed,
        };
        match &self.backend {
            Backend::StateVector => {
                let mut amps = vec![C64::new(0.0, 0.0); 1 << width];
                amps[0] = C64::new(1.0, 0.0);
                self.walk_pure(&walk, 0, 0, vec![(1.0, amps)], 0, &mut values);
            }
            Backend::Density(noise) => {
                let dim = 1usize << width;
                let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
                rho[0] = C64::new(1.0, 0.0);
                self.walk_mixed(&walk, noise.as_ref(), 0, 0, rho, 0, &mut values);
            }
        }
        Ok(FragmentTable { strings, values })
    }

    /// Terms to follow at insertion `ins` and the variant stride they advance by.
    fn choices(&self, walk: &Walk, ins: usize) -> (Vec<usize>, usize) {
        let cut = walk.frag.insertions[ins].cut;
        match walk.fixed {
            Some(choice) => (vec![choice[cut]], 0),
            None => (
                (0..self.prog.term_table()[cut].len()).collect(),
                self.strides[walk.f][ins],
            ),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn walk_pure(
        &self,
        walk: &Walk,
        ins: usize,
        start: usize,
        mut branches: Vec<(f64, Vec<C64>)>,
        variant: usize,
        out: &mut [f64],
    ) {
        let Walk { f, frag, gates, .. } = *walk;
        let width = frag.width();
        let stop = frag.insertions.get(ins).map_or(gates.len(), |i| i.location);
        for g in &gates[start..stop] {
            for (_, amps) in branches.iter_mut() {
                apply_gate(amps, width, g);
            }
        }
        let Some(point) = frag.insertions.get(ins) else {
            let row = &mut out[variant * self.masks[f].len()..(variant + 1) * self.masks[f].len()];
            for (slot, masks) in row.iter_mut().zip(&self.masks[f]) {
                *slot = branches
                    .iter()
                    .map(|(s, amps)| s * pauli_expectation(amps, masks).re)
                    .sum();
            }
            return;
        };
        let bit = width - 1 - point.qubit;
        let (choices, stride) = self.choices(walk, ins);
        for t in choices {
            let term = &self.prog.term_table()[point.cut][t];
            let op = match point.side {
                Side::A => &term.op_a,
                Side::B => &term.op_b,
            };
            let mut next = Vec::with_capacity(branches.len() * op.branches.len());
            for (sign, amps) in &branches {
                for (k, ks) in &op.branches {
                    let mut a = amps.clone();
                    apply_1q(&mut a, bit, k);
                    next.push((sign * ks, a));
                }
            }
            self.walk_pure(walk, ins + 1, stop, next, variant + t * stride, out);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn walk_mixed(
        &self,
        walk: &Walk,
        noise: Option<&NoiseChannel>,
        ins: usize,
        start: usize,
        mut rho: Vec<C64>,
        variant: usize,
        out: &mut [f64],
    ) {
        let Walk { f, frag, gates, .. } = *walk;
        let width = frag.width();
        let stop = frag.insertions.get(ins).map_or(gates.len(), |i| i.location);
        for g in &gates[start..stop] {
            apply_gate_density(&mut rho, width, g);
            if let Some(ch) = noise {
                for &q in g.qubits() {
                    apply_noise(&mut rho, width, q, ch);
                }
            }
        }
        let Some(point) = frag.insertions.get(ins) else {
            let dim = 1usize << width;
            let row = &mut out[variant * self.masks[f].len()..(variant + 1) * self.masks[f].len()];
            for (slot, masks) in row.iter_mut().zip(&self.masks[f]) {
                *slot = pauli_trace(&rho, dim, masks).re;
            }
            return;
        };
        let (choices, stride) = self.choices(walk, ins);
        for t in choices {
            let term = &self.prog.term_table()[point.cut][t];
            let op = match point.side {
                Side::A => &term.op_a,
                Side::B => &term.op_b,
            };
            let mut next = rho.clone();
            apply_signed_kraus(&mut next, width, point.qubit, &op.branches);
            if let Some(ch) = noise {
                apply_noise(&mut next, width, point.qubit, ch);
            }
            self.walk_mixed(walk, noise, ins + 1, stop, next, variant + t * stride, out);
        }
    }

    /// All fragment tables at `theta`.
    pub fn all_tables(&self, theta: &[f64]) -> Result<Vec<FragmentTable>> {
        (0..self.prog.fragment_count())
            .map(|f| self.fragment_table(f, theta, None))
            .collect()
    }

    /// Observable value of one term combination, without its coefficient.
    #[inline]
    fn combination_value(&self, tables: &[&FragmentTable], digits: &[usize]) -> f64 {
        let variants: Vec<usize> = self
            .cut_strides
            .iter()
            .map(|cs| cs.iter().map(|&(cut, stride)| digits[cut] * stride).sum())
            .collect();
        self.coeffs
            .iter()
            .zip(&self.string_index)
            .map(|(c, idx)| {
                c * tables
                    .iter()
                    .zip(&variants)
                    .zip(idx)
                    .map(|((t, &v), &s)| t.get(v, s))
                    .product::<f64>()
            })
            .sum()
    }

    /// Signed sum over every term combination, accumulated in a fixed order.
    pub fn combine(&self, tables: &[&FragmentTable]) -> Result<f64> {
        check_exact(self.prog)?;
        let terms = self.prog.term_table();
        let mut digits = vec![0usize; terms.len()];
        let mut total = 0.0;
        loop {
            let coeff: f64 = digits
                .iter()
                .zip(terms)
                .map(|(&d, t)| t[d].coefficient)
                .product();
            total += coeff * self.combination_value(tables, &digits);
            // Odometer increment, last cut fastest.
            let mut i = digits.len();
            loop {
                if i == 0 {
                    return Ok(total);
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < terms[i].len() {
                    break;
                }
                digits[i] = 0;
            }
        }
    }
}

/// Exact reconstruction is refused above `MAX_EXACT_CUTS` cuts.
pub fn check_exact(prog: &KnitProgram) -> Result<()> {
    let cuts = prog.term_table().len();
    if cuts > MAX_EXACT_CUTS {
        return Err(Error::CapacityExceeded {
            what: "exact reconstruction cuts",
            limit: MAX_EXACT_CUTS,
            got: cuts,
        });
    }
    Ok(())
}

/// `sum over combinations of prod p_i * prod fragment sub-expectations`, equal to the uncut
/// expectation of `obs`.
pub fn reconstruct_exact(prog: &KnitProgram, obs: &Observable, theta: &[f64]) -> Result<f64> {
    reconstruct_exact_with(prog, obs, theta, Backend::StateVector)
}

pub fn reconstruct_exact_with(
    prog: &KnitProgram,
    obs: &Observable,
    theta: &[f64],
    backend: Backend,
) -> Result<f64> {
    if theta.len() != prog.num_params() {
        return Err(Error::ParameterLength {
            expected: prog.num_params(),
            got: theta.len(),
        });
    }
    check_exact(prog)?;
    let eval = KnitEvaluator::new(prog, obs, backend)?;
    let tables = eval.all_tables(theta)?;
    eval.combine(&tables.iter().collect::<Vec<_>>())
}

/// Monte Carlo reconstruction result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Draws `shots` term combinations with probability `prod |p_i| / C` and averages
/// `C * prod sign(p_i) * value`.
pub fn reconstruct_sampled(
    prog: &KnitProgram,
    obs: &Observable,
    theta: &[f64],
    shots: usize,
    seed: u64,
) -> Result<SampledEstimate> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be at least 1".into()));
    }
    if theta.len() != prog.num_params() {
        return Err(Error::ParameterLength {
            expected: prog.num_params(),
            got: theta.len(),
        });
    }
    let eval = KnitEvaluator::new(prog, obs, Backend::StateVector)?;
    let terms = prog.term_table();
    if terms.is_empty() {
        let tables = eval.all_tables(theta)?;
        return Ok(SampledEstimate {
            estimate: eval.combine(&tables.iter().collect::<Vec<_>>())?,
            std_error: 0.0,
        });
    }
    // Small programs tabulate every variant once; larger ones simulate the drawn variant per shot.
    let tabulated = if prog
        .fragments()
        .iter()
        .all(|f| f.insertions.len() <= MAX_EXACT_CUTS)
    {
        Some(eval.all_tables(theta)?)
    } else {
        None
    };
    let table_refs: Option<Vec<&FragmentTable>> = tabulated.as_ref().map(|t| t.iter().collect());
    let zero = vec![0usize; terms.len()];
    let norm = prog.one_norm();
    let samplers: Vec<WeightedIndex<f64>> = terms
        .iter()
        .map(|t| {
            WeightedIndex::new(t.iter().map(|q| q.coefficient.abs()))
                .expect("non-zero coefficients")
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits = vec![0usize; terms.len()];
    // Welford accumulation.
    let (mut mean, mut m2) = (0.0, 0.0);
    for shot in 0..shots {
        let mut sign = 1.0;
        for (i, s) in samplers.iter().enumerate() {
            digits[i] = s.sample(&mut rng);
            sign *= terms[i][digits[i]].coefficient.signum();
        }
        let value = match &table_refs {
            Some(tables) => eval.combination_value(tables, &digits),
            None => {
                let rows = (0..prog.fragment_count())
                    .map(|f| eval.fragment_variant(f, theta, &digits))
                    .collect::<Result<Vec<_>>>()?;
                eval.combination_value(&rows.iter().collect::<Vec<_>>(), &zero)
            }
        };
        let x = norm * sign * value;
        let delta = x - mean;
        mean += delta / (shot + 1) as f64;
        m2 += delta * (x - mean);
    }
    let std_error = if shots > 1 {
        (m2 / (shots - 1) as f64 / shots as f64).sqrt()
    } else {
        0.0
    };
    Ok(SampledEstimate {
        estimate: mean,
        std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Angle, Circuit, Gate, GateKind};
    use crate::knit::PartitionPlan;
    use crate::sim::{run_density, run_statevector};

    fn sample() -> (Circuit, Observable) {
        let c = Circuit::new(
            3,
            vec![
                Gate::rotation(GateKind::Ry, 0, Angle::Slot(0)),
                Gate::rotation(GateKind::Rx, 1, Angle::Slot(1)),
                Gate::two(GateKind::Cx, 0, 1),
                Gate::rotation(GateKind::Rz, 1, Angle::Slot(2)),
                Gate::two(GateKind::Cz, 1, 2),
                Gate::rotation(GateKind::Ry, 2, Angle::Slot(0)),
                Gate::two(GateKind::Cx, 2, 0),
                Gate::single(GateKind::H, 1),
            ],
            3,
        )
        .unwrap();
        let obs = Observable::parse("0.7 ZZI\n-0.3 XIY\n0.2 IZX\n0.1 III\n").unwrap();
        (c, obs)
    }

    #[test]
    fn exact_matches_uncut() {
        let (c, obs) = sample();
        let theta = [0.3, -1.1, 2.0];
        let plan = PartitionPlan::from_blocks(&c, vec![vec![0], vec![1], vec![2]], 1).unwrap();
        let prog = crate::knit::cut_circuit(&c, &plan).unwrap();
        assert_eq!(prog.cut_points().len(), 3);
        let bound = c.bind(&theta).unwrap();
        let direct = run_statevector(&bound, None)
            .unwrap()
            .expectation(&obs)
            .unwrap();
        let knit = reconstruct_exact(&prog, &obs, &theta).unwrap();
        assert!((direct - knit).abs() < 1e-10, "{direct} vs {knit}");
        let dens = reconstruct_exact_with(&prog, &obs, &theta, Backend::Density(None)).unwrap();
        assert!((direct - dens).abs() < 1e-10);
        let noisy = run_density(&bound, None)
            .unwrap()
            .expectation(&obs)
            .unwrap();
        assert!((noisy - direct).abs() < 1e-10);
    }

    #[test]
    fn sampled_is_deterministic_and_close() {
        let (c, obs) = sample();
        let theta = [0.3, -1.1, 2.0];
        let plan = PartitionPlan::from_blocks(&c, vec![vec![0, 1], vec![2]], 2).unwrap();
        let prog = crate::knit::cut_circuit(&c, &plan).unwrap();
        let exact = reconstruct_exact(&prog, &obs, &theta).unwrap();
        let a = reconstruct_sampled(&prog, &obs, &theta, 20_000, 7).unwrap();
        let b = reconstruct_sampled(&prog, &obs, &theta, 20_000, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.estimate - exact).abs() < 5.0 * a.std_error + 1e-12);
    }
}
