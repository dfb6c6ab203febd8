//! Exact finite-space ground truth.
//!
//! On a finite space with a finite horizon the law of `(X_0, …, X_n)` is a
//! dense table over `K^{n+1}` tuples, computed by the recursion
//! `P_{k+1}(u, x) = P_k(u) · κ'_k(u)[x]`, where `κ'_k` is the kernel with
//! evaluations filled in by `f`. Every subset is an event; events are
//! predicates on tuples. With the discrete topology every `f` is
//! continuous, so the continuity side conditions of the lemmas are vacuous.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::Stream;

mod suite;

pub use suite::{
    kernel_avg_check, monte_carlo_agreement, random_restricted_instance,
    random_truncation_instance, restricted_sanity, run_suite, McAgreement, RestrictedSanity,
    SuiteOptions, SuiteReport,
};

pub const MAX_STATES: usize = 8;
pub const MAX_HORIZON: usize = 6;
/// Tolerance of every exact comparison in this module.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Finite labelled metric space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpace {
    labels: Vec<String>,
    metric: Vec<f64>,
}

impl DiscreteSpace {
    pub fn new(labels: Vec<String>, metric: Vec<Vec<f64>>) -> Result<Self> {
        let k = labels.len();
        if k == 0 || k > 16 {
            return Err(invalid("a discrete space needs between 1 and 16 states"));
        }
        if metric.len() != k || metric.iter().any(|r| r.len() != k) {
            return Err(invalid(format!("metric must be a {k}×{k} matrix")));
        }
        let m: Vec<f64> = metric.into_iter().flatten().collect();
        for i in 0..k {
            if m[i * k + i] != 0.0 {
                return Err(invalid(format!("metric diagonal at {i} is not zero")));
            }
            for j in 0..k {
                let d = m[i * k + j];
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(invalid(format!(
                        "metric entry ({i},{j}) must be finite and nonnegative"
                    )));
                }
                if d != m[j * k + i] {
                    return Err(invalid(format!("metric is not symmetric at ({i},{j})")));
                }
                for l in 0..k {
                    if d > m[i * k + l] + m[l * k + j] + EXACT_TOLERANCE {
                        return Err(invalid(format!(
                            "triangle inequality fails for ({i},{l},{j})"
                        )));
                    }
                }
            }
        }
        Ok(Self { labels, metric: m })
    }

    /// States `0..k` on a line, `dist(i, j) = |i − j|`.
    pub fn line(k: usize) -> Result<Self> {
        let labels = (0..k).map(|i| format!("s{i}")).collect();
        let metric = (0..k)
            .map(|i| (0..k).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        Self::new(labels, metric)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric[i * self.len() + j]
    }
}

/// A Markov kernel from `(states, values)` histories to distributions over
/// the `K` states.
pub trait DiscreteKernel: Sync {
    fn transition(&self, states: &[usize], values: &[f64]) -> Vec<f64>;
}

impl<F> DiscreteKernel for F
where
    F: Fn(&[usize], &[f64]) -> Vec<f64> + Sync,
{
    fn transition(&self, states: &[usize], values: &[f64]) -> Vec<f64> {
        self(states, values)
    }
}

/// A statistic of the value history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryStat {
    First,
    Last,
    Max,
    Min,
}

impl HistoryStat {
    pub fn apply(&self, values: &[f64]) -> f64 {
        match self {
            HistoryStat::First => values[0],
            HistoryStat::Last => values[values.len() - 1],
            HistoryStat::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            HistoryStat::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Table-driven kernels, loadable from configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelTable {
    /// Same distribution after every history.
    Constant(Vec<f64>),
    /// Row indexed by the last state.
    ByLastState(Vec<Vec<f64>>),
    /// `above` when `stat(values) ≥ threshold`, else `below`.
    Switch {
        stat: HistoryStat,
        threshold: f64,
        below: Box<KernelTable>,
        above: Box<KernelTable>,
    },
}

impl KernelTable {
    /// Every vector has `k` nonnegative entries summing to one.
    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            KernelTable::Constant(p) => check_distribution(p, k, "constant kernel"),
            KernelTable::ByLastState(rows) => {
                if rows.len() != k {
                    return Err(invalid(format!(
                        "kernel needs {k} rows, found {}",
                        rows.len()
                    )));
                }
                rows.iter()
                    .enumerate()
                    .try_for_each(|(i, r)| check_distribution(r, k, &format!("kernel row {i}")))
            }
            KernelTable::Switch {
                below,
                above,
                threshold,
                ..
            } => {
                if !threshold.is_finite() {
                    return Err(invalid("switch threshold must be finite"));
                }
                below.validate(k)?;
                above.validate(k)
            }
        }
    }

    /// Whether the kernel ever reads the values.
    pub fn reads_values(&self) -> bool {
        matches!(self, KernelTable::Switch { .. })
    }
}

impl DiscreteKernel for KernelTable {
    fn transition(&self, states: &[usize], values: &[f64]) -> Vec<f64> {
        match self {
            KernelTable::Constant(p) => p.clone(),
            KernelTable::ByLastState(rows) => rows[states[states.len() - 1]].clone(),
            KernelTable::Switch {
                stat,
                threshold,
                below,
                above,
            } => {
                if stat.apply(values) >= *threshold {
                    above.transition(states, values)
                } else {
                    below.transition(states, values)
                }
            }
        }
    }
}

pub(crate) fn check_distribution(p: &[f64], k: usize, what: &str) -> Result<()> {
    if p.len() != k {
        return Err(invalid(format!(
            "{what}: expected {k} probabilities, found {}",
            p.len()
        )));
    }
    if p.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(invalid(format!(
            "{what}: probabilities must be finite and nonnegative"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > EXACT_TOLERANCE {
        return Err(Error::NotNormalized {
            what: String::from(what),
            sum,
        });
    }
    Ok(())
}

/// `κ'(u) = κ(u, (f(u_0), …, f(u_n)))`.
pub fn pullback_kernel<'a>(
    kappa: &'a dyn DiscreteKernel,
    f: &'a [f64],
) -> impl Fn(&[usize]) -> Vec<f64> + 'a {
    move |u: &[usize]| {
        let values: Vec<f64> = u.iter().map(|&s| f[s]).collect();
        kappa.transition(u, &values)
    }
}

/// Exact law of `(X_0, …, X_n)`: a weight for every tuple in `K^{n+1}`,
/// indexed in base `K` with `X_0` most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleMeasure {
    states: usize,
    horizon: usize,
    weights: Vec<f64>,
}

impl TupleMeasure {
    pub fn states(&self) -> usize {
        self.states
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index_of(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &s| acc * self.states + s)
    }

    pub fn tuple_of(&self, mut index: usize) -> Vec<usize> {
        let mut t = vec![0; self.horizon + 1];
        for slot in t.iter_mut().rev() {
            *slot = index % self.states;
            index /= self.states;
        }
        t
    }

    pub fn weight(&self, tuple: &[usize]) -> f64 {
        self.weights[self.index_of(tuple)]
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Mass of the event, summed in tuple order.
    pub fn measure(&self, event: impl Fn(&[usize]) -> bool) -> f64 {
        let mut t = vec![0; self.horizon + 1];
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            decode_into(i, self.states, &mut t);
            if event(&t) {
                acc += w;
            }
        }
        acc
    }

    /// Law of the first `n + 1` coordinates.
    pub fn marginal(&self, n: usize) -> Result<TupleMeasure> {
        if n > self.horizon {
            return Err(invalid("cannot marginalize to a longer horizon"));
        }
        let block = self.states.pow((self.horizon - n) as u32);
        let weights = self.weights.chunks(block).map(pairwise_sum).collect();
        Ok(TupleMeasure {
            states: self.states,
            horizon: n,
            weights,
        })
    }

    /// Largest absolute weight difference.
    pub fn max_abs_diff(&self, other: &TupleMeasure) -> Result<f64> {
        if self.states != other.states || self.horizon != other.horizon {
            return Err(invalid("measures live on different tuple spaces"));
        }
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn decode_into(mut index: usize, k: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % k;
        index /= k;
    }
}

/// Fixed-order pairwise summation.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn check_limits(states: usize, horizon: usize) -> Result<()> {
    if states == 0 || states > MAX_STATES || horizon > MAX_HORIZON {
        return Err(Error::OracleLimits {
            states,
            horizon,
            max_states: MAX_STATES,
            max_horizon: MAX_HORIZON,
        });
    }
    Ok(())
}

/// `P_n = ν ⊗ κ'_0 ⊗ … ⊗ κ'_{n−1}` with `κ'_k` the pullback of `kernels[k]` along `f`.
pub fn finite_product(
    nu: &[f64],
    kernels: &[&dyn DiscreteKernel],
    f: &[f64],
    horizon: usize,
) -> Result<TupleMeasure> {
    let k = nu.len();
    check_limits(k, horizon)?;
    check_distribution(nu, k, "initial distribution")?;
    if f.len() != k {
        return Err(invalid(format!("f needs {k} values, found {}", f.len())));
    }
    if kernels.len() < horizon {
        return Err(invalid(format!(
            "horizon {horizon} needs {horizon} kernels, found {}",
            kernels.len()
        )));
    }
    let mut weights = nu.to_vec();
    let mut tuple = Vec::with_capacity(horizon + 1);
    for (step, kernel) in kernels.iter().take(horizon).enumerate() {
        let kappa = pullback_kernel(*kernel, f);
        let mut next = Vec::with_capacity(weights.len() * k);
        tuple.resize(step + 1, 0);
        for (i, w) in weights.iter().enumerate() {
            decode_into(i, k, &mut tuple);
            let row = kappa(&tuple);
            check_distribution(&row, k, &format!("kernel {step} after {tuple:?}"))?;
            next.extend(row.iter().map(|p| w * p));
        }
        weights = next;
    }
    Ok(TupleMeasure {
        states: k,
        horizon,
        weights,
    })
}

/// `π(S) = Σ_a μ(a) κ(a, S)`.
pub fn kernel_avg(mu: &[f64], rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_distribution(mu, mu.len(), "averaging measure")?;
    if rows.len() != mu.len() {
        return Err(invalid(
            "one kernel row per point of the averaging measure is required",
        ));
    }
    let width = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != width) {
        return Err(invalid("kernel rows have different lengths"));
    }
    let mut out = vec![0.0; width];
    for (m, row) in mu.iter().zip(rows) {
        for (o, p) in out.iter_mut().zip(row) {
            *o += m * p;
        }
    }
    Ok(out)
}

/// Result of a lemma check.
#[derive(Debug, Clone, PartialEq)]
pub enum LemmaCheck {
    Holds,
    /// The conclusion fails by `excess` (a counterexample to the lemma).
    Fails {
        excess: f64,
    },
    /// The hypothesis does not hold; `witness` is an offending tuple or state.
    HypothesisViolated {
        witness: Vec<usize>,
    },
}

impl LemmaCheck {
    pub fn holds(&self) -> bool {
        matches!(self, LemmaCheck::Holds)
    }
}

/// Monotonicity by truncation: if every tuple of `b` (horizon `m`) has its
/// length-`n+1` prefix in `e`, then `P_m(b) ≤ P_n(e)`.
///
/// The two measures must come from the same chain; this is checked by
/// marginalizing `p_m` down to horizon `n`.
pub fn check_truncation_monotone(
    p_n: &TupleMeasure,
    p_m: &TupleMeasure,
    e: impl Fn(&[usize]) -> bool,
    b: impl Fn(&[usize]) -> bool,
) -> Result<LemmaCheck> {
    if p_n.states != p_m.states || p_n.horizon > p_m.horizon {
        return Err(invalid("truncation needs n ≤ m on the same state space"));
    }
    let drift = p_m.marginal(p_n.horizon)?.max_abs_diff(p_n)?;
    if drift > EXACT_TOLERANCE {
        return Err(Error::ProvenanceMismatch(drift));
    }
    let cut = p_n.horizon + 1;
    let mut t = vec![0; p_m.horizon + 1];
    let mut lhs = 0.0;
    for (i, w) in p_m.weights.iter().enumerate() {
        decode_into(i, p_m.states, &mut t);
        if b(&t) {
            if !e(&t[..cut]) {
                return Ok(LemmaCheck::HypothesisViolated { witness: t });
            }
            lhs += w;
        }
    }
    let rhs = p_n.measure(&e);
    Ok(if lhs <= rhs + EXACT_TOLERANCE {
        LemmaCheck::Holds
    } else {
        LemmaCheck::Fails { excess: lhs - rhs }
    })
}

/// Equality of restricted measures: if `f = g` on `e`, the laws under `f`
/// and `g` agree on every tuple with all coordinates in `e`.
pub fn check_restricted_equality(
    nu: &[f64],
    kernels: &[&dyn DiscreteKernel],
    f: &[f64],
    g: &[f64],
    e: &[usize],
    horizon: usize,
) -> Result<LemmaCheck> {
    if let Some(&s) = e
        .iter()
        .find(|&&s| s >= f.len() || s >= g.len() || f[s] != g[s])
    {
        return Ok(LemmaCheck::HypothesisViolated { witness: vec![s] });
    }
    let pf = finite_product(nu, kernels, f, horizon)?;
    let pg = finite_product(nu, kernels, g, horizon)?;
    let mut inside = vec![false; nu.len()];
    for &s in e {
        inside[s] = true;
    }
    let mut t = vec![0; horizon + 1];
    let mut worst: f64 = 0.0;
    for (i, (a, b)) in pf.weights.iter().zip(&pg.weights).enumerate() {
        decode_into(i, nu.len(), &mut t);
        if t.iter().all(|&s| inside[s]) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(if worst <= EXACT_TOLERANCE {
        LemmaCheck::Holds
    } else {
        LemmaCheck::Fails { excess: worst }
    })
}

/// Draws one index from a probability vector by inversion.
pub fn sample_categorical(p: &[f64], rng: &mut Stream) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in p.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the total: take the last state with mass
    p.iter().rposition(|w| *w > 0.0).unwrap_or(p.len() - 1)
}

/// One path of the chain, simulated step by step.
pub fn simulate_chain(
    nu: &[f64],
    kernels: &[&dyn DiscreteKernel],
    f: &[f64],
    horizon: usize,
    rng: &mut Stream,
) -> Vec<usize> {
    let mut states = Vec::with_capacity(horizon + 1);
    let mut values = Vec::with_capacity(horizon + 1);
    let x0 = sample_categorical(nu, rng);
    states.push(x0);
    values.push(f[x0]);
    for kernel in kernels.iter().take(horizon) {
        let p = kernel.transition(&states, &values);
        let x = sample_categorical(&p, rng);
        states.push(x);
        values.push(f[x]);
    }
    states
}

/// A complete finite chain: space, initial law, per-step kernels and the
/// objective (plus an optional second objective for restricted-equality checks).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub space: DiscreteSpace,
    pub nu: Vec<f64>,
    /// Kernel for step `k` is `kernels[min(k, len − 1)]`.
    pub kernels: Vec<KernelTable>,
    pub f: Vec<f64>,
    pub g: Option<Vec<f64>>,
    pub horizon: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let k = self.space.len();
        check_limits(k, self.horizon)?;
        check_distribution(&self.nu, k, "initial distribution")?;
        if self.kernels.is_empty() && self.horizon > 0 {
            return Err(invalid("scenario has no kernels"));
        }
        for (i, kt) in self.kernels.iter().enumerate() {
            kt.validate(k).map_err(|e| match e {
                Error::NotNormalized { what, sum } => Error::NotNormalized {
                    what: format!("kernel {i}, {what}"),
                    sum,
                },
                other => other,
            })?;
        }
        if self.f.len() != k || self.g.as_ref().is_some_and(|g| g.len() != k) {
            return Err(invalid(format!("objective tables need {k} values")));
        }
        Ok(())
    }

    pub fn kernel_refs(&self) -> Vec<&dyn DiscreteKernel> {
        (0..self.horizon)
            .map(|s| &self.kernels[s.min(self.kernels.len() - 1)] as &dyn DiscreteKernel)
            .collect()
    }

    pub fn product(&self, horizon: usize) -> Result<TupleMeasure> {
        let refs = self.kernel_refs();
        let refs: Vec<&dyn DiscreteKernel> = (0..horizon)
            .map(|s| {
                refs.get(s)
                    .copied()
                    .unwrap_or(&self.kernels[self.kernels.len() - 1])
            })
            .collect();
        finite_product(&self.nu, &refs, &self.f, horizon)
    }

    /// Random scenario with `K ≤ max_states` and `n ≤ max_horizon`. About
    /// half of the kernels switch on the value history.
    pub fn random(rng: &mut Stream, max_states: usize, max_horizon: usize) -> Self {
        let k = rng.random_range(1..=max_states.max(1));
        let horizon = rng.random_range(0..=max_horizon);
        let f: Vec<f64> = (0..k)
            .map(|_| (rng.random_range(0..5) as f64) / 4.0)
            .collect();
        let nu = random_distribution(rng, k);
        let kernels = (0..horizon.max(1))
            .map(|_| {
                if rng.random_bool(0.5) {
                    let stats = [
                        HistoryStat::First,
                        HistoryStat::Last,
                        HistoryStat::Max,
                        HistoryStat::Min,
                    ];
                    KernelTable::Switch {
                        stat: stats[rng.random_range(0..4)],
                        threshold: f[rng.random_range(0..k)],
                        below: Box::new(random_rows(rng, k)),
                        above: Box::new(random_rows(rng, k)),
                    }
                } else {
                    random_rows(rng, k)
                }
            })
            .collect();
        Scenario {
            space: DiscreteSpace::line(k).expect("k ≤ 16"),
            nu,
            kernels,
            f,
            g: None,
            horizon,
        }
    }
}

fn random_rows(rng: &mut Stream, k: usize) -> KernelTable {
    KernelTable::ByLastState((0..k).map(|_| random_distribution(rng, k)).collect())
}

/// Random probability vector; some entries are exactly zero. The last
/// entry absorbs rounding so the vector sums to one within an ulp or two.
pub fn random_distribution(rng: &mut Stream, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random::<f64>() + 0.01
            }
        })
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        w[rng.random_range(0..k)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}
