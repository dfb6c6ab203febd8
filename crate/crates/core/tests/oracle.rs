use kernelopt_core::algorithm::Serial;
use kernelopt_core::metrics::clopper_pearson;
use kernelopt_core::oracle::{
    check_restricted_equality, finite_product, monte_carlo_agreement, random_distribution,
    restricted_sanity, run_suite, simulate_chain, DiscreteKernel, DiscreteSpace, KernelTable,
    LemmaCheck, Scenario, SuiteOptions, EXACT_TOLERANCE,
};
use kernelopt_core::rng::derive_stream;
use kernelopt_core::Error;
use rand::Rng;

#[test]
fn randomized_scenarios_are_exact() {
    let opts = SuiteOptions {
        lemma_instances: 3,
        ..SuiteOptions::default()
    };
    let scenarios = opts.random_scenarios(300, 1);
    let report = run_suite(&Serial, &scenarios, &opts, 2).unwrap();
    assert_eq!(report.exact_failures(), 0, "{report:?}");
    assert!(report.worst_mass_error <= EXACT_TOLERANCE);
    assert!(report.worst_marginal_error <= EXACT_TOLERANCE);
    assert_eq!(report.truncation_instances, 900);
    assert!(report.kernel_avg_checks > 0);
}

#[test]
fn random_scenarios_cover_the_limits() {
    let scenarios = SuiteOptions::default().random_scenarios(500, 3);
    let max_k = scenarios.iter().map(|s| s.space.len()).max().unwrap();
    let max_n = scenarios.iter().map(|s| s.horizon).max().unwrap();
    assert_eq!((max_k, max_n), (4, 4));
    assert!(scenarios
        .iter()
        .any(|s| s.kernels.iter().any(KernelTable::reads_values)));
    for s in &scenarios {
        s.validate().unwrap();
    }
}

#[test]
fn restricted_equality_is_not_vacuous() {
    let sanity = restricted_sanity().unwrap();
    assert_eq!(sanity.check, LemmaCheck::Holds);
    assert!(sanity.max_diff_outside > 1e-3);
}

#[test]
fn restricted_equality_edge_cases() {
    let k = KernelTable::ByLastState(vec![vec![0.5, 0.5], vec![0.1, 0.9]]);
    let refs: Vec<&dyn DiscreteKernel> = vec![&k, &k];
    let nu = [0.4, 0.6];
    // identical objectives
    assert!(
        check_restricted_equality(&nu, &refs, &[1.0, 2.0], &[1.0, 2.0], &[0, 1], 2)
            .unwrap()
            .holds()
    );
    // empty E
    assert!(
        check_restricted_equality(&nu, &refs, &[1.0, 2.0], &[5.0, 7.0], &[], 2)
            .unwrap()
            .holds()
    );
    // hypothesis violated
    assert_eq!(
        check_restricted_equality(&nu, &refs, &[1.0, 2.0], &[1.0, 3.0], &[1], 2).unwrap(),
        LemmaCheck::HypothesisViolated { witness: vec![1] }
    );
}

#[test]
fn three_state_chain_matches_a_million_paths() {
    let mut rng = derive_stream(11, 0);
    let kernels: Vec<KernelTable> = (0..2)
        .map(|_| {
            KernelTable::ByLastState((0..3).map(|_| random_distribution(&mut rng, 3)).collect())
        })
        .collect();
    let refs: Vec<&dyn DiscreteKernel> = kernels.iter().map(|k| k as &dyn DiscreteKernel).collect();
    let nu = random_distribution(&mut rng, 3);
    let f = [0.0, 1.0, 2.0];
    let exact = finite_product(&nu, &refs, &f, 2).unwrap();
    let paths = 1_000_000;
    let mut counts = vec![0u64; 27];
    for i in 0..paths {
        let t = simulate_chain(&nu, &refs, &f, 2, &mut derive_stream(12, i));
        counts[exact.index_of(&t)] += 1;
    }
    let mut misses = 0;
    for (i, c) in counts.iter().enumerate() {
        let (lo, hi) = clopper_pearson(*c, paths, 0.99).unwrap();
        let p = exact.weights()[i];
        if p < lo || p > hi {
            misses += 1;
        }
    }
    // 27 singleton events at 99%: more than two misses is very unlikely
    assert!(misses <= 2, "{misses} misses");
}

#[test]
fn monte_carlo_agreement_on_random_scenarios() {
    let opts = SuiteOptions::default();
    for (i, s) in opts.random_scenarios(5, 21).iter().enumerate() {
        let mc = monte_carlo_agreement(&Serial, s, 50, 100_000, 0.99, i as u64).unwrap();
        assert!(mc.misses <= 2, "scenario {i}: {mc:?}");
    }
}

#[test]
fn corrupted_row_is_named() {
    let space = DiscreteSpace::line(2).unwrap();
    let s = Scenario {
        space,
        nu: vec![0.5, 0.5],
        kernels: vec![KernelTable::ByLastState(vec![
            vec![0.5, 0.5],
            vec![0.5, 0.4],
        ])],
        f: vec![0.0, 1.0],
        g: None,
        horizon: 2,
    };
    match s.validate() {
        Err(Error::NotNormalized { what, sum }) => {
            assert!(what.contains("row 1"), "{what}");
            assert!((sum - 0.9).abs() < 1e-12);
        }
        other => panic!("expected NotNormalized, got {other:?}"),
    }
    assert!(matches!(s.product(1), Err(Error::NotNormalized { .. })));
}

#[test]
fn limits_are_enforced() {
    let s = Scenario {
        space: DiscreteSpace::line(9).unwrap(),
        nu: vec![1.0 / 9.0; 9],
        kernels: vec![KernelTable::Constant(vec![1.0 / 9.0; 9])],
        f: vec![0.0; 9],
        g: None,
        horizon: 1,
    };
    assert!(matches!(s.validate(), Err(Error::OracleLimits { .. })));
}

#[test]
fn largest_dense_product_is_normalized() {
    let mut rng = derive_stream(5, 0);
    let rows: Vec<Vec<f64>> = (0..8).map(|_| random_distribution(&mut rng, 8)).collect();
    let k = KernelTable::Switch {
        stat: kernelopt_core::oracle::HistoryStat::Min,
        threshold: 0.3,
        below: Box::new(KernelTable::ByLastState(rows)),
        above: Box::new(KernelTable::Constant(vec![0.125; 8])),
    };
    let refs: Vec<&dyn DiscreteKernel> = vec![&k; 6];
    let f: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
    let p = finite_product(&[0.125; 8], &refs, &f, 6).unwrap();
    assert_eq!(p.weights().len(), 8usize.pow(7));
    assert!((p.total() - 1.0).abs() <= EXACT_TOLERANCE);
}

mod properties {
    use super::*;
    use kernelopt_core::oracle::{random_restricted_instance, random_truncation_instance};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn products_conserve_mass_and_marginalize(seed in any::<u64>()) {
            let s = Scenario::random(&mut derive_stream(seed, 0), 4, 4);
            let top = s.product(s.horizon).unwrap();
            prop_assert!((top.total() - 1.0).abs() <= EXACT_TOLERANCE);
            for n in 0..s.horizon {
                let drift = top.marginal(n).unwrap().max_abs_diff(&s.product(n).unwrap()).unwrap();
                prop_assert!(drift <= EXACT_TOLERANCE);
            }
        }

        #[test]
        fn lemma_checkers_hold_under_their_hypotheses(seed in any::<u64>()) {
            let mut rng = derive_stream(seed, 1);
            let s = Scenario::random(&mut rng, 4, 4);
            prop_assert_eq!(random_truncation_instance(&s, &mut rng).unwrap(), LemmaCheck::Holds);
            prop_assert_eq!(random_restricted_instance(&s, &mut rng).unwrap(), LemmaCheck::Holds);
        }
    }
}
