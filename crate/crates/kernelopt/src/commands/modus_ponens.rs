use anyhow::{Context, Result};
use kernelopt_core::metrics::{
    check_modus_ponens_inclusion, dispersion_error_bound, TailEstimator, TailKind,
};

use super::{describe, horizon_batches, Outcome, RunContext};
use crate::build;
use crate::config::ExperimentConfig;
use crate::output::{curve_table, num, tag, write_rows, Outputs, Series};

/// Checks `{gap > ε} ⊆ {dispersion > ε/L}` on every trajectory and compares
/// the two tails on the same trajectories.
///
/// Violations: inclusion failures on any trajectory, and any horizon where
/// more trajectories have a large gap than a large dispersion (the counts
/// come from the same trajectories, so this follows from the inclusion).
pub fn run(cfg: &ExperimentConfig, ctx: &RunContext<'_>) -> Result<Outcome> {
    let b = build::search_box(cfg)?;
    let alg = build::algorithm(&cfg.algorithm, &cfg.algorithm_params, &b)?;
    let obj = build::objective(&cfg.objective, &cfg.objective_params, &b)?;
    obj.known_argmax().with_context(|| {
        format!(
            "objective `{}` has no certified maximizer on this box",
            obj.name()
        )
    })?;
    let mut out = Outputs::new(ctx.out, cfg.svg)?;
    out.line("modus-ponens");
    for l in describe(cfg, &cfg.algorithm, &obj) {
        out.line(l);
    }
    let batches = horizon_batches(cfg, ctx.exec, &alg, &obj)?;
    let sqrt_d = (b.dim() as f64).sqrt();

    let mut violations = 0;
    let mut rows = Vec::new();
    for &eps in &cfg.epsilons {
        let delta = eps / obj.lipschitz();
        // the sampling tail at δ needs the grid error below δ / 2
        let resolution = cfg.resolution.min(0.5 * delta / sqrt_d);
        if resolution < cfg.resolution {
            out.line(format!(
                "epsilon {}: resolution refined to {} for delta = {}",
                num(eps),
                num(resolution),
                num(delta)
            ));
        }
        for batch in &batches {
            let r = check_modus_ponens_inclusion(batch, &obj, eps, resolution)?;
            violations += r.violations + r.dispersion_violations;
            rows.push(vec![
                num(eps),
                num(delta),
                batch.horizon.to_string(),
                r.trajectories.to_string(),
                r.gap_events.to_string(),
                r.violations.to_string(),
                r.dispersion_violations.to_string(),
            ]);
        }

        let mut est = TailEstimator::new(cfg.n_list.clone(), cfg.m, cfg.master_seed, resolution);
        est.confidence = cfg.confidence;
        est.prefix_mode = cfg.prefix_mode;
        let curves = est.curves(
            ctx.exec,
            &alg,
            &obj,
            &[(TailKind::Consistency, eps), (TailKind::Sampling, delta)],
        )?;
        let (cons, samp) = (&curves[0], &curves[1]);
        out.tail(cons)?;
        out.tail(samp)?;
        out.line(curve_table(cons));
        out.line(curve_table(samp));
        out.line(format!(
            "  sampling grid error bound: {}",
            num(dispersion_error_bound(&b, resolution))
        ));
        let mut squeeze_ok = true;
        for (c, s) in cons.entries.iter().zip(&samp.entries) {
            if c.count > s.count {
                violations += 1;
            }
            if c.estimate > s.estimate + 2.0 * s.ci_width() {
                squeeze_ok = false;
            }
        }
        out.line(format!(
            "  consistency(eps) <= sampling(eps/L) + 2 CI width at every n: {}",
            if squeeze_ok { "yes" } else { "no" }
        ));
        out.plot(
            &format!("modus_ponens_{}", tag(eps)),
            &format!(
                "gap tail at {} vs dispersion tail at {}",
                tag(eps),
                tag(delta)
            ),
            &[
                Series::from_curve("consistency", cons),
                Series::from_curve("sampling", samp),
            ],
        )?;
    }
    write_rows(
        &out.path("inclusion.csv"),
        &[
            "epsilon",
            "delta",
            "n",
            "trajectories",
            "gap_events",
            "violations",
            "dispersion_violations",
        ]
        .map(String::from),
        &rows,
    )?;
    out.line(format!("inclusion violations: {violations}"));
    Ok(Outcome {
        report: out.finish()?,
        violations,
    })
}
