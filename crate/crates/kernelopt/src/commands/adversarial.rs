use anyhow::{bail, Result};
use kernelopt_core::algorithm::{run_batch_with, TrajectoryBatch};
use kernelopt_core::metrics::{
    ball_avoidance, dispersion_error_bound, dispersion_exceeds, find_starved_ball, TailEstimator,
    TailKind,
};
use kernelopt_core::objectives::f_tilde;
use kernelopt_core::space::{build_cover, dist, ProbeLattice};

use super::{describe, Outcome, RunContext};
use crate::build;
use crate::config::ExperimentConfig;
use crate::output::{curve_table, num, write_rows, Outputs, Series};

/// Trajectories under `f` and `f̃` from the same streams agree up to and
/// including the first point inside the ball. Returns the number that do.
fn matched_prefixes(
    on_f: &TrajectoryBatch,
    on_ft: &TrajectoryBatch,
    center: &[f64],
    radius: f64,
) -> usize {
    on_f.iter()
        .zip(on_ft.iter())
        .filter(|(a, c)| {
            let entry = a
                .points()
                .iter()
                .position(|p| dist(p, center).expect("same dimension") < radius);
            match entry {
                None => a == c,
                Some(k) => {
                    a.seed == c.seed
                        && a.points()[..=k] == c.points()[..=k]
                        && a.values()[..k] == c.values()[..k]
                }
            }
        })
        .count()
}

/// The reverse direction: find a ball the algorithm starves, hide a bump in
/// it and measure the resulting optimality gap.
pub fn run(cfg: &ExperimentConfig, ctx: &RunContext<'_>) -> Result<Outcome> {
    let adv = cfg.adversarial.as_ref().expect("validated");
    let b = build::search_box(cfg)?;
    let alg = build::algorithm(&cfg.algorithm, &cfg.algorithm_params, &b)?;
    let f = build::objective(&cfg.objective, &cfg.objective_params, &b)?;
    let mut out = Outputs::new(ctx.out, cfg.svg)?;
    out.line("adversarial");
    for l in describe(cfg, &cfg.algorithm, &f) {
        out.line(l);
    }
    let horizon = adv.n.unwrap_or(cfg.max_n());
    let batch = run_batch_with(ctx.exec, &alg, &f, horizon, cfg.master_seed, cfg.m)?;

    let cover = build_cover(&b, adv.eps1 / 2.0)?;
    let fractions = ball_avoidance(&batch, &cover);
    let mut header = vec!["index".to_string()];
    header.extend((0..b.dim()).map(|k| format!("c_{k}")));
    header.push("avoid_fraction".into());
    let rows: Vec<Vec<String>> = cover
        .centers()
        .iter()
        .zip(&fractions)
        .enumerate()
        .map(|(i, (c, fr))| {
            let mut r = vec![i.to_string()];
            r.extend(c.iter().map(|x| num(*x)));
            r.push(num(*fr));
            r
        })
        .collect();
    write_rows(&out.path("cover_avoidance.csv"), &header, &rows)?;

    let eps2 = match adv.eps2 {
        Some(e) => e,
        None => {
            let sqrt_d = (b.dim() as f64).sqrt();
            if adv.eps1 <= cfg.resolution * sqrt_d {
                bail!(
                    "field `resolution`: must be below eps1 / sqrt(d) = {}",
                    num(adv.eps1 / sqrt_d)
                );
            }
            let lattice = ProbeLattice::new(&b, cfg.resolution)?;
            let eb = dispersion_error_bound(&b, cfg.resolution);
            let hits = batch
                .iter()
                .filter(|t| dispersion_exceeds(t.points(), &lattice, adv.eps1, eb).0)
                .count();
            hits as f64 / batch.len() as f64
        }
    };
    out.line(format!(
        "starved-ball search: horizon {horizon}, eps1 = {}, eps2 = {}, {} cover balls of radius {}",
        num(adv.eps1),
        num(eps2),
        cover.len(),
        num(cover.radius())
    ));

    let mut summary = vec![
        vec!["eps1".to_string(), num(adv.eps1)],
        vec!["eps2".into(), num(eps2)],
        vec!["cover_balls".into(), cover.len().to_string()],
    ];
    let Some(starved) = find_starved_ball(&batch, &cover, eps2) else {
        out.line("no starved ball: algorithm appears to sample the space at this scale");
        summary.push(vec!["starved_ball".into(), "none".into()]);
        write_rows(
            &out.path("adversarial_summary.csv"),
            &["key".into(), "value".into()],
            &summary,
        )?;
        return Ok(Outcome {
            report: out.finish()?,
            violations: 0,
        });
    };
    out.line(format!(
        "starved ball {}: center {:?}, avoided by {} of trajectories (threshold {})",
        starved.index,
        starved.center.coords(),
        num(starved.fraction),
        num(starved.threshold)
    ));

    let ft = f_tilde(
        &f,
        starved.center.clone(),
        adv.eps1,
        build::coefficients(cfg.objective_params.bump),
    )?;
    let fmax = match f.known_max() {
        Some(m) => m,
        None => f.range_bounds(adv.eps1 / 16.0)?.1,
    };
    let ft_max = ft.known_max().expect("f_tilde always records its maximum");
    let delta = ft_max - fmax;
    out.line(format!(
        "bump: height {}, max f~ - max f = {}, L(f~) = {}",
        num(ft.bump_height().expect("bump")),
        num(delta),
        num(ft.lipschitz())
    ));

    let mut est = TailEstimator::new(cfg.n_list.clone(), cfg.m, cfg.master_seed, cfg.resolution);
    est.confidence = cfg.confidence;
    est.prefix_mode = cfg.prefix_mode;
    let curve = est.curve(ctx.exec, &alg, &ft, TailKind::Consistency, delta / 2.0)?;
    out.tail(&curve)?;
    out.line(curve_table(&curve));
    out.plot(
        "adversarial",
        &format!("gap tail on f~ at {}", num(delta / 2.0)),
        &[Series::from_curve("consistency", &curve)],
    )?;
    let violated = curve
        .entries
        .iter()
        .all(|e| e.estimate >= starved.fraction - e.ci_width());
    out.line(if violated {
        "verdict: consistency violated (gap tail stays at the starved-ball mass for every n)"
    } else {
        "verdict: consistency violation not observed at this scale"
    });

    let on_ft = run_batch_with(ctx.exec, &alg, &ft, horizon, cfg.master_seed, cfg.m)?;
    let matched = matched_prefixes(&batch, &on_ft, &starved.center, starved.radius);
    let violations = batch.len() - matched;
    out.line(format!(
        "matched seeds: {matched} of {} trajectories coincide under f and f~ until they enter the ball",
        batch.len()
    ));

    summary.extend([
        vec!["starved_ball".into(), starved.index.to_string()],
        vec!["avoid_fraction".into(), num(starved.fraction)],
        vec!["threshold".into(), num(starved.threshold)],
        vec!["max_gap".into(), num(delta)],
        vec!["matched_trajectories".into(), matched.to_string()],
        vec!["trajectories".into(), batch.len().to_string()],
        vec!["consistency_violated".into(), violated.to_string()],
    ]);
    write_rows(
        &out.path("adversarial_summary.csv"),
        &["key".into(), "value".into()],
        &summary,
    )?;
    Ok(Outcome {
        report: out.finish()?,
        violations,
    })
}
