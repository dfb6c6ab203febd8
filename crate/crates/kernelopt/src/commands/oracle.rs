use anyhow::{bail, Result};
use kernelopt_core::oracle::{
    check_restricted_equality, restricted_sanity, run_suite, LemmaCheck, Scenario, SuiteOptions,
    SuiteReport,
};
use kernelopt_core::rng::stream_key;
use kernelopt_core::Error;

use super::{Outcome, RunContext};
use crate::build;
use crate::config::{ExperimentConfig, OracleConfig};
use crate::output::{num, write_rows, Outputs};

fn scenario_row(name: &str, s: &Scenario, r: &SuiteReport) -> Vec<String> {
    vec![
        name.to_string(),
        s.space.len().to_string(),
        s.horizon.to_string(),
        num(r.worst_mass_error),
        num(r.worst_marginal_error),
        r.truncation_failures.to_string(),
        r.restricted_failures.to_string(),
        r.kernel_avg_failures.to_string(),
        r.mc_events.to_string(),
        r.mc_misses.to_string(),
    ]
}

/// Exact checks on configured and randomized finite scenarios. Every exact
/// failure (including a kernel row that does not sum to one) is a violation;
/// Monte Carlo misses are reported but are statistical.
pub fn run(cfg: &ExperimentConfig, ctx: &RunContext<'_>) -> Result<Outcome> {
    let ocfg = cfg.oracle.clone().unwrap_or_default();
    let randomized = ctx.randomized.unwrap_or(ocfg.randomized);
    if ocfg.scenario.is_empty() && randomized == 0 {
        bail!("no scenario supplied: add `[[oracle.scenario]]` tables or pass --randomized <T>");
    }
    let opts = options(&ocfg)?;
    let mut out = Outputs::new(ctx.out, false)?;
    out.line("oracle");
    out.line(format!(
        "{} configured scenarios, {randomized} randomized (K <= {}, n <= {}), master_seed = {}",
        ocfg.scenario.len(),
        opts.max_states,
        opts.max_horizon,
        cfg.master_seed
    ));

    let mut violations = 0;
    let mut named: Vec<(String, Scenario)> = Vec::new();
    for (i, spec) in ocfg.scenario.iter().enumerate() {
        let name = spec.name.clone().unwrap_or_else(|| format!("scenario_{i}"));
        match build::scenario(spec) {
            Ok(s) => named.push((name, s)),
            Err(e) => match e.downcast_ref::<Error>() {
                Some(Error::NotNormalized { .. }) => {
                    out.line(format!("{name}: Markov invariant FAILED: {e}"));
                    violations += 1;
                }
                _ => return Err(e.context(format!("scenario `{name}`"))),
            },
        }
    }
    named.extend(
        opts.random_scenarios(randomized, stream_key(cfg.master_seed, 1))
            .into_iter()
            .enumerate()
            .map(|(i, s)| (format!("random_{i}"), s)),
    );

    let mut total = SuiteReport::default();
    let mut rows = Vec::new();
    let mut mc_scenarios_ok = 0;
    for (j, (name, s)) in named.iter().enumerate() {
        let r = run_suite(
            ctx.exec,
            std::slice::from_ref(s),
            &opts,
            stream_key(cfg.master_seed, 100 + j as u64),
        )?;
        if r.exact_failures() > 0 {
            out.line(format!("{name}: {} exact failures", r.exact_failures()));
        }
        if r.mc_misses <= 1 {
            mc_scenarios_ok += 1;
        }
        rows.push(scenario_row(name, s, &r));
        merge(&mut total, &r);
        if let Some(g) = &s.g {
            let e: Vec<usize> = (0..s.f.len()).filter(|&x| s.f[x] == g[x]).collect();
            let check = check_restricted_equality(&s.nu, &s.kernel_refs(), &s.f, g, &e, s.horizon)?;
            total.restricted_instances += 1;
            if !check.holds() {
                total.restricted_failures += 1;
                out.line(format!(
                    "{name}: restricted equality with the configured g FAILED: {check:?}"
                ));
            }
        }
    }
    let sanity = restricted_sanity()?;
    let sanity_ok = sanity.check == LemmaCheck::Holds && sanity.max_diff_outside > 0.0;
    violations += total.exact_failures() + usize::from(!sanity_ok);

    out.line(format!("scenarios: {}", total.scenarios));
    out.line(format!(
        "mass conservation: worst |sum - 1| = {:e}, failures {}",
        total.worst_mass_error, total.mass_failures
    ));
    out.line(format!(
        "marginalization: worst drift = {:e}, failures {}",
        total.worst_marginal_error, total.marginal_failures
    ));
    out.line(format!(
        "truncation monotonicity: {} instances, {} failures",
        total.truncation_instances, total.truncation_failures
    ));
    out.line(format!(
        "restricted equality: {} instances, {} failures",
        total.restricted_instances, total.restricted_failures
    ));
    out.line(format!(
        "restricted equality off E (non-vacuity): equal on E = {}, largest difference off E = {}",
        sanity.check == LemmaCheck::Holds,
        num(sanity.max_diff_outside)
    ));
    out.line(format!(
        "kernel averaging: {} checks, {} failures",
        total.kernel_avg_checks, total.kernel_avg_failures
    ));
    if opts.mc_events > 0 {
        out.line(format!(
            "Monte Carlo agreement ({} paths, {}% intervals): {} events, {} misses, \
             {mc_scenarios_ok} of {} scenarios with at most one miss",
            opts.mc_paths,
            num(opts.mc_confidence * 100.0),
            total.mc_events,
            total.mc_misses,
            total.scenarios
        ));
    }
    out.line(format!("exact failures: {violations}"));

    write_rows(
        &out.path("oracle_scenarios.csv"),
        &[
            "scenario",
            "states",
            "horizon",
            "mass_error",
            "marginal_error",
            "truncation_failures",
            "restricted_failures",
            "kernel_avg_failures",
            "mc_events",
            "mc_misses",
        ]
        .map(String::from),
        &rows,
    )?;
    write_rows(
        &out.path("oracle_summary.csv"),
        &["check", "instances", "failures"].map(String::from),
        &[
            vec![
                "mass".into(),
                total.scenarios.to_string(),
                total.mass_failures.to_string(),
            ],
            vec![
                "marginalization".into(),
                total.scenarios.to_string(),
                total.marginal_failures.to_string(),
            ],
            vec![
                "truncation".into(),
                total.truncation_instances.to_string(),
                total.truncation_failures.to_string(),
            ],
            vec![
                "restricted".into(),
                total.restricted_instances.to_string(),
                total.restricted_failures.to_string(),
            ],
            vec![
                "restricted_sanity".into(),
                "1".into(),
                usize::from(!sanity_ok).to_string(),
            ],
            vec![
                "kernel_avg".into(),
                total.kernel_avg_checks.to_string(),
                total.kernel_avg_failures.to_string(),
            ],
            vec![
                "monte_carlo_events".into(),
                total.mc_events.to_string(),
                total.mc_misses.to_string(),
            ],
        ],
    )?;
    Ok(Outcome {
        report: out.finish()?,
        violations,
    })
}

fn options(o: &OracleConfig) -> Result<SuiteOptions> {
    use kernelopt_core::oracle::{MAX_HORIZON, MAX_STATES};
    if o.max_states == 0 || o.max_states > MAX_STATES || o.max_horizon > MAX_HORIZON {
        bail!(
            "fields `oracle.max_states`/`oracle.max_horizon`: limits are K <= {MAX_STATES}, n <= {MAX_HORIZON}"
        );
    }
    Ok(SuiteOptions {
        max_states: o.max_states,
        max_horizon: o.max_horizon,
        lemma_instances: o.lemma_instances,
        mc_events: o.mc_events,
        mc_paths: o.mc_paths.max(1),
        mc_confidence: 0.99,
    })
}

fn merge(total: &mut SuiteReport, r: &SuiteReport) {
    total.scenarios += r.scenarios;
    total.worst_mass_error = total.worst_mass_error.max(r.worst_mass_error);
    total.worst_marginal_error = total.worst_marginal_error.max(r.worst_marginal_error);
    total.mass_failures += r.mass_failures;
    total.marginal_failures += r.marginal_failures;
    total.truncation_instances += r.truncation_instances;
    total.truncation_failures += r.truncation_failures;
    total.restricted_instances += r.restricted_instances;
    total.restricted_failures += r.restricted_failures;
    total.kernel_avg_checks += r.kernel_avg_checks;
    total.kernel_avg_failures += r.kernel_avg_failures;
    total.mc_events += r.mc_events;
    total.mc_misses += r.mc_misses;
    total.mc_worst_scenario = total.mc_worst_scenario.max(r.mc_worst_scenario);
    total
        .mc_scenario_misses
        .extend_from_slice(&r.mc_scenario_misses);
}
