use kernelopt_core::algorithm::{run_batch, run_trajectory, Serial};
use kernelopt_core::algorithms::{halfspace_sampler, random_search, stuck_hill_climber};
use kernelopt_core::metrics::{
    check_modus_ponens_inclusion, clopper_pearson, consistency_gap, dispersion_error_bound,
    max_min_dist, TailEstimator, TailKind,
};
use kernelopt_core::objectives::{piecewise_peak, reverse_ackley};
use kernelopt_core::rng::derive_stream;
use kernelopt_core::space::{Point, SearchBox};
use proptest::prelude::*;
use rand::Rng;

/// `sup_{x ∈ [lo, hi]} min_i |x − x_i|` from the sorted points.
fn exact_dispersion_1d(xs: &[f64], lo: f64, hi: f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let mut best = (s[0] - lo).max(hi - s[s.len() - 1]);
    for w in s.windows(2) {
        best = best.max((w[1] - w[0]) / 2.0);
    }
    best
}

#[test]
fn grid_dispersion_brackets_the_exact_value() {
    let mut rng = derive_stream(42, 0);
    for _ in 0..1000 {
        let lo = rng.random_range(-3.0..0.0);
        let hi = lo + rng.random_range(0.5..4.0);
        let b = SearchBox::cube(1, lo, hi).unwrap();
        let n = rng.random_range(1..30);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
        let points: Vec<Point> = xs.iter().map(|x| Point::new(vec![*x]).unwrap()).collect();
        let resolution = rng.random_range(0.001..0.05);
        let (value, eb) = max_min_dist(&points, &b, resolution).unwrap();
        let exact = exact_dispersion_1d(&xs, lo, hi);
        assert_eq!(eb, dispersion_error_bound(&b, resolution));
        assert!(
            value <= exact + 1e-12 && exact <= value + eb + 1e-12,
            "value {value} exact {exact} eb {eb}"
        );
    }
}

/// Exact binomial draw by summing Bernoulli trials.
fn binomial(rng: &mut impl Rng, trials: u64, p: f64) -> u64 {
    (0..trials).filter(|_| rng.random::<f64>() < p).count() as u64
}

#[test]
fn clopper_pearson_coverage() {
    for (k, p) in [0.01, 0.5, 0.9].into_iter().enumerate() {
        let mut rng = derive_stream(7, k as u64);
        let trials = 200;
        let covered = (0..10_000)
            .filter(|_| {
                let (lo, hi) =
                    clopper_pearson(binomial(&mut rng, trials, p), trials, 0.95).unwrap();
                lo <= p && p <= hi
            })
            .count();
        assert!(
            covered as f64 / 10_000.0 >= 0.95 - 0.01,
            "p = {p}: coverage {covered}"
        );
    }
}

fn inclusion_cases() -> Vec<kernelopt_core::objectives::Objective> {
    let line = SearchBox::cube(1, -2.0, 2.0).unwrap();
    let square = SearchBox::cube(2, -2.0, 2.0).unwrap();
    vec![
        reverse_ackley(&line),
        reverse_ackley(&square),
        piecewise_peak(&line, Point::new(vec![0.7]).unwrap()).unwrap(),
        piecewise_peak(&square, Point::new(vec![-0.5, 1.0]).unwrap()).unwrap(),
    ]
}

#[test]
fn inclusion_never_fails() {
    for (k, obj) in inclusion_cases().iter().enumerate() {
        let b = obj.domain();
        let hill = stuck_hill_climber(b, 0.05).unwrap();
        for eps in [0.1, 0.3, 1.0] {
            let resolution = 0.9 * eps / obj.lipschitz() / (b.dim() as f64).sqrt();
            let batch = run_batch(&random_search(b), obj, 20, k as u64, 300).unwrap();
            let r = check_modus_ponens_inclusion(&batch, obj, eps, resolution).unwrap();
            assert_eq!(
                (r.violations, r.dispersion_violations),
                (0, 0),
                "{}",
                obj.name()
            );
            assert!((r.delta - eps / obj.lipschitz()).abs() < 1e-15);
            let batch = run_batch(&hill, obj, 20, k as u64, 300).unwrap();
            let r = check_modus_ponens_inclusion(&batch, obj, eps, resolution).unwrap();
            assert_eq!((r.violations, r.dispersion_violations), (0, 0));
        }
    }
}

#[test]
fn large_epsilon_means_no_gap_events() {
    let b = SearchBox::cube(1, 0.0, 1.0).unwrap();
    let obj = piecewise_peak(&b, Point::new(vec![0.5]).unwrap()).unwrap();
    let batch = run_batch(&random_search(&b), &obj, 3, 0, 100).unwrap();
    let r = check_modus_ponens_inclusion(&batch, &obj, 0.6, 0.01).unwrap();
    assert_eq!(r.gap_events, 0);
    let est = TailEstimator::new(vec![1, 3], 100, 0, 0.01);
    let c = est
        .curve(
            &Serial,
            &random_search(&b),
            &obj,
            TailKind::Consistency,
            0.6,
        )
        .unwrap();
    assert!(c.entries.iter().all(|e| e.count == 0));
}

#[test]
fn halfspace_sampling_tail_is_pinned() {
    let b = SearchBox::cube(1, 0.0, 1.0).unwrap();
    let obj = piecewise_peak(&b, Point::new(vec![0.25]).unwrap()).unwrap();
    let est = TailEstimator::new(vec![10, 50, 200], 200, 3, 0.01);
    let c = est
        .curve(
            &Serial,
            &halfspace_sampler(&b),
            &obj,
            TailKind::Sampling,
            0.25,
        )
        .unwrap();
    for e in &c.entries {
        assert_eq!(e.count, 200);
        assert_eq!(e.strict_count, Some(200));
        assert_eq!(e.estimate, 1.0);
        assert!(e.ci_lo <= 1.0 && e.ci_hi == 1.0);
    }
}

#[test]
fn tail_estimator_is_deterministic_and_seeded_per_horizon() {
    let b = SearchBox::cube(1, -2.0, 2.0).unwrap();
    let obj = reverse_ackley(&b);
    let alg = random_search(&b);
    let requests = [(TailKind::Sampling, 0.1), (TailKind::Consistency, 0.1)];
    for prefix_mode in [false, true] {
        let mut est = TailEstimator::new(vec![5, 20, 80], 150, 9, 0.01);
        est.prefix_mode = prefix_mode;
        let a = est.curves(&Serial, &alg, &obj, &requests).unwrap();
        let c = est.curves(&Serial, &alg, &obj, &requests).unwrap();
        assert_eq!(a, c);
        for curve in &a {
            for e in &curve.entries {
                assert_eq!(e.m, 150);
                assert!(e.ci_lo <= e.estimate && e.estimate <= e.ci_hi);
            }
        }
    }
}

#[test]
fn tail_estimator_rejects_bad_configs() {
    let b = SearchBox::cube(2, -2.0, 2.0).unwrap();
    let obj = reverse_ackley(&b);
    let alg = random_search(&b);
    let bad = [
        TailEstimator::new(vec![], 10, 0, 0.01),
        TailEstimator::new(vec![5, 5], 10, 0, 0.01),
        TailEstimator::new(vec![5], 0, 0, 0.01),
        TailEstimator::new(vec![5], 10, 0, 0.2),
    ];
    for est in bad {
        assert!(est
            .curve(&Serial, &alg, &obj, TailKind::Sampling, 0.1)
            .is_err());
    }
    let shifted = reverse_ackley(&SearchBox::cube(2, 1.0, 2.0).unwrap());
    let est = TailEstimator::new(vec![5], 10, 0, 0.01);
    assert!(est
        .curve(
            &Serial,
            &random_search(shifted.domain()),
            &shifted,
            TailKind::Consistency,
            0.1
        )
        .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gap_is_monotone_along_prefixes(seed in any::<u64>(), d in 1usize..=2) {
        let b = SearchBox::cube(d, -2.0, 2.0).unwrap();
        let obj = reverse_ackley(&b);
        let t = run_trajectory(&random_search(&b), &obj, 40, seed).unwrap();
        let gaps: Vec<f64> = (1..=t.values().len())
            .map(|k| consistency_gap(&t.values()[..k], &obj).unwrap())
            .collect();
        prop_assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn dispersion_is_monotone_under_appending(seed in any::<u64>(), d in 1usize..=2) {
        let b = SearchBox::cube(d, 0.0, 1.0).unwrap();
        let obj = reverse_ackley(&b);
        let t = run_trajectory(&random_search(&b), &obj, 12, seed).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..=t.points().len() {
            let (v, _) = max_min_dist(&t.points()[..k], &b, 0.02).unwrap();
            prop_assert!(v <= last);
            last = v;
        }
    }
}
