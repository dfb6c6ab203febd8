//! Randomized verification suites over finite scenarios.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{
    check_restricted_equality, check_truncation_monotone, finite_product, kernel_avg,
    pullback_kernel, simulate_chain, DiscreteKernel, HistoryStat, KernelTable, LemmaCheck,
    Scenario, TupleMeasure, EXACT_TOLERANCE,
};
use crate::algorithm::Executor;
use crate::error::Result;
use crate::metrics::clopper_pearson;
use crate::rng::{derive_stream, Stream};

/// Truncation monotonicity on a random instance: random `n ≤ m`, a random event `E` on
/// `(n+1)`-tuples and a random `B` inside the continuation set of `E`
/// (the whole continuation set a quarter of the time).
pub fn random_truncation_instance(s: &Scenario, rng: &mut Stream) -> Result<LemmaCheck> {
    let m = rng.random_range(0..=s.horizon);
    let n = rng.random_range(0..=m);
    let p_n = s.product(n)?;
    let p_m = s.product(m)?;
    let e: Vec<bool> = (0..p_n.weights().len())
        .map(|_| rng.random_bool(0.5))
        .collect();
    let full = rng.random_bool(0.25);
    let b: Vec<bool> = (0..p_m.weights().len())
        .map(|_| full || rng.random_bool(0.5))
        .collect();
    let in_e = |t: &[usize]| e[p_n.index_of(t)];
    check_truncation_monotone(&p_n, &p_m, in_e, |t: &[usize]| {
        in_e(&t[..=n]) && b[p_m.index_of(t)]
    })
}

/// Restricted equality on a random instance: random `E`, `g = f` on `E` and a fresh
/// random value elsewhere.
pub fn random_restricted_instance(s: &Scenario, rng: &mut Stream) -> Result<LemmaCheck> {
    let k = s.space.len();
    let e: Vec<usize> = (0..k).filter(|_| rng.random_bool(0.5)).collect();
    let g: Vec<f64> = (0..k)
        .map(|x| {
            if e.contains(&x) {
                s.f[x]
            } else {
                s.f[x] + rng.random_range(-2.0..2.0)
            }
        })
        .collect();
    let horizon = rng.random_range(0..=s.horizon);
    check_restricted_equality(&s.nu, &s.kernel_refs(), &s.f, &g, &e, horizon)
}

/// Largest difference between `kernel_avg(ν, κ'_0)` and the law of `X_1`
/// read off the finite product, or `None` for horizon 0.
pub fn kernel_avg_check(s: &Scenario) -> Result<Option<f64>> {
    if s.horizon == 0 {
        return Ok(None);
    }
    let k = s.space.len();
    let refs = s.kernel_refs();
    let kappa = pullback_kernel(refs[0], &s.f);
    let rows: Vec<Vec<f64>> = (0..k).map(|a| kappa(&[a])).collect();
    let avg = kernel_avg(&s.nu, &rows)?;
    let p1 = finite_product(&s.nu, &refs, &s.f, 1)?;
    let law_x1: Vec<f64> = (0..k)
        .map(|x1| (0..k).map(|x0| p1.weight(&[x0, x1])).sum())
        .collect();
    Ok(Some(
        avg.iter()
            .zip(&law_x1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
    ))
}

/// Monte Carlo agreement on random cylinder events `A_0 × … × A_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct McAgreement {
    pub events: usize,
    /// Events whose exact probability falls outside the interval.
    pub misses: usize,
}

pub fn monte_carlo_agreement<E: Executor>(
    exec: &E,
    s: &Scenario,
    events: usize,
    paths: usize,
    confidence: f64,
    seed: u64,
) -> Result<McAgreement> {
    let k = s.space.len();
    let exact = s.product(s.horizon)?;
    let refs = s.kernel_refs();
    let sims = exec.map_indexed(paths, |i| {
        simulate_chain(
            &s.nu,
            &refs,
            &s.f,
            s.horizon,
            &mut derive_stream(seed, i as u64),
        )
    });
    let mut rng = derive_stream(seed, u64::MAX);
    let mut misses = 0;
    for _ in 0..events {
        let sets: Vec<Vec<bool>> = (0..=s.horizon)
            .map(|_| (0..k).map(|_| rng.random_bool(0.5)).collect())
            .collect();
        let hit = |t: &[usize]| t.iter().zip(&sets).all(|(x, a)| a[*x]);
        let p = exact.measure(hit);
        let count = sims.iter().filter(|t| hit(t)).count();
        let (lo, hi) = clopper_pearson(count as u64, paths as u64, confidence)?;
        // exact sums carry rounding, e.g. a sure event can total 1 + 2⁻⁵²
        if p < lo - EXACT_TOLERANCE || p > hi + EXACT_TOLERANCE {
            misses += 1;
        }
    }
    Ok(McAgreement { events, misses })
}

/// The non-vacuity construction for restricted equality: `K = 3`,
/// `E = {0, 1}`, value-dependent kernels, `f = g` on `E`, `f(2) ≠ g(2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedSanity {
    pub check: LemmaCheck,
    /// Largest weight difference over tuples touching state 2.
    pub max_diff_outside: f64,
}

pub fn restricted_sanity() -> Result<RestrictedSanity> {
    let kernel = KernelTable::Switch {
        stat: HistoryStat::Max,
        threshold: 1.0,
        below: Box::new(KernelTable::ByLastState(vec![
            vec![0.5, 0.25, 0.25],
            vec![0.25, 0.5, 0.25],
            vec![0.2, 0.2, 0.6],
        ])),
        above: Box::new(KernelTable::Constant(vec![0.1, 0.1, 0.8])),
    };
    let refs: Vec<&dyn DiscreteKernel> = vec![&kernel; 3];
    let nu = [0.3, 0.3, 0.4];
    let f = [0.0, 0.5, 0.2];
    let g = [0.0, 0.5, 2.0];
    let check = check_restricted_equality(&nu, &refs, &f, &g, &[0, 1], 3)?;
    let pf = finite_product(&nu, &refs, &f, 3)?;
    let pg = finite_product(&nu, &refs, &g, 3)?;
    let max_diff_outside = (0..pf.weights().len())
        .filter(|&i| pf.tuple_of(i).contains(&2))
        .map(|i| (pf.weights()[i] - pg.weights()[i]).abs())
        .fold(0.0, f64::max);
    Ok(RestrictedSanity {
        check,
        max_diff_outside,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub max_states: usize,
    pub max_horizon: usize,
    /// Lemma instances per scenario.
    pub lemma_instances: usize,
    /// Cylinder events per scenario; 0 skips the Monte Carlo suite.
    pub mc_events: usize,
    pub mc_paths: usize,
    pub mc_confidence: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            max_states: 4,
            max_horizon: 4,
            lemma_instances: 1,
            mc_events: 0,
            mc_paths: 100_000,
            mc_confidence: 0.99,
        }
    }
}

/// Counts from every suite. Only the exact checks are contracts; Monte
/// Carlo misses are statistical.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteReport {
    pub scenarios: usize,
    /// Largest `|Σ P_n − 1|` over all scenarios and horizons.
    pub worst_mass_error: f64,
    /// Largest marginalization discrepancy.
    pub worst_marginal_error: f64,
    pub mass_failures: usize,
    pub marginal_failures: usize,
    pub truncation_instances: usize,
    pub truncation_failures: usize,
    pub restricted_instances: usize,
    pub restricted_failures: usize,
    pub kernel_avg_checks: usize,
    pub kernel_avg_failures: usize,
    pub mc_events: usize,
    pub mc_misses: usize,
    /// Most misses in one scenario.
    pub mc_worst_scenario: usize,
    /// Misses of each scenario that ran the Monte Carlo suite, in order.
    pub mc_scenario_misses: Vec<usize>,
}

impl SuiteReport {
    pub fn exact_failures(&self) -> usize {
        self.mass_failures
            + self.marginal_failures
            + self.truncation_failures
            + self.restricted_failures
            + self.kernel_avg_failures
    }
}

/// Runs every suite on each scenario.
pub fn run_suite<E: Executor>(
    exec: &E,
    scenarios: &[Scenario],
    opts: &SuiteOptions,
    seed: u64,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::default();
    for (j, s) in scenarios.iter().enumerate() {
        s.validate()?;
        report.scenarios += 1;
        let products: Vec<TupleMeasure> = (0..=s.horizon)
            .map(|n| s.product(n))
            .collect::<Result<_>>()?;
        for (n, p) in products.iter().enumerate() {
            let mass = (p.total() - 1.0).abs();
            report.worst_mass_error = report.worst_mass_error.max(mass);
            if mass > EXACT_TOLERANCE {
                report.mass_failures += 1;
            }
            for coarse in &products[..n] {
                let drift = p.marginal(coarse.horizon())?.max_abs_diff(coarse)?;
                report.worst_marginal_error = report.worst_marginal_error.max(drift);
                if drift > EXACT_TOLERANCE {
                    report.marginal_failures += 1;
                }
            }
        }
        let mut rng = derive_stream(seed, j as u64);
        for _ in 0..opts.lemma_instances {
            report.truncation_instances += 1;
            if !random_truncation_instance(s, &mut rng)?.holds() {
                report.truncation_failures += 1;
            }
            report.restricted_instances += 1;
            if !random_restricted_instance(s, &mut rng)?.holds() {
                report.restricted_failures += 1;
            }
        }
        if let Some(diff) = kernel_avg_check(s)? {
            report.kernel_avg_checks += 1;
            if diff > EXACT_TOLERANCE {
                report.kernel_avg_failures += 1;
            }
        }
        if opts.mc_events > 0 {
            let mc = monte_carlo_agreement(
                exec,
                s,
                opts.mc_events,
                opts.mc_paths,
                opts.mc_confidence,
                crate::rng::stream_key(seed ^ 0x6D63, j as u64),
            )?;
            report.mc_events += mc.events;
            report.mc_misses += mc.misses;
            report.mc_worst_scenario = report.mc_worst_scenario.max(mc.misses);
            report.mc_scenario_misses.push(mc.misses);
        }
    }
    Ok(report)
}

impl SuiteOptions {
    /// `count` random scenarios within the configured limits.
    pub fn random_scenarios(&self, count: usize, seed: u64) -> Vec<Scenario> {
        (0..count)
            .map(|i| {
                Scenario::random(
                    &mut derive_stream(seed, i as u64),
                    self.max_states,
                    self.max_horizon,
                )
            })
            .collect()
    }
}
