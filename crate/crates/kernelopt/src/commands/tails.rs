use anyhow::Result;
use kernelopt_core::metrics::{TailEstimator, TailKind};

use super::{describe, horizon_batches, Outcome, RunContext};
use crate::build;
use crate::config::ExperimentConfig;
use crate::output::{curve_table, tag, write_batch, Outputs, Series};

/// Sampling and consistency tail curves for every epsilon.
pub fn run(cfg: &ExperimentConfig, ctx: &RunContext<'_>) -> Result<Outcome> {
    let b = build::search_box(cfg)?;
    let alg = build::algorithm(&cfg.algorithm, &cfg.algorithm_params, &b)?;
    let obj = build::objective(&cfg.objective, &cfg.objective_params, &b)?;
    let mut out = Outputs::new(ctx.out, cfg.svg)?;
    out.line("tails");
    for l in describe(cfg, &cfg.algorithm, &obj) {
        out.line(l);
    }

    let with_consistency = obj.known_max().is_some();
    if !with_consistency {
        out.line("no certified maximum on this box: consistency tails skipped");
    }
    let mut requests = Vec::new();
    for &eps in &cfg.epsilons {
        requests.push((TailKind::Sampling, eps));
        if with_consistency {
            requests.push((TailKind::Consistency, eps));
        }
    }
    let mut est = TailEstimator::new(cfg.n_list.clone(), cfg.m, cfg.master_seed, cfg.resolution);
    est.confidence = cfg.confidence;
    est.prefix_mode = cfg.prefix_mode;
    let curves = est.curves(ctx.exec, &alg, &obj, &requests)?;

    for &eps in &cfg.epsilons {
        let mut series = Vec::new();
        for c in curves.iter().filter(|c| c.epsilon == eps) {
            out.tail(c)?;
            out.line(curve_table(c));
            series.push(Series::from_curve(c.kind.as_str(), c));
        }
        out.plot(
            &format!("tails_{}", tag(eps)),
            &format!(
                "{} on {}, epsilon = {}",
                cfg.algorithm,
                obj.name(),
                tag(eps)
            ),
            &series,
        )?;
    }
    if let Some(k) = alg.fallbacks() {
        out.line(format!("rejection-budget fallbacks: {k}"));
    }
    if cfg.dump_batches {
        for batch in horizon_batches(cfg, ctx.exec, &alg, &obj)? {
            write_batch(&out.path(&format!("batch_n{}.csv", batch.horizon)), &batch)?;
        }
        out.line("trajectory batches written to batch_n<n>.csv");
    }
    Ok(Outcome {
        report: out.finish()?,
        violations: 0,
    })
}
