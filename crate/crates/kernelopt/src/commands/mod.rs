//! One module per subcommand. Each returns its report and a count of
//! contract violations; the binary exits nonzero when that count is positive.

pub mod adversarial;
pub mod cover;
pub mod modus_ponens;
pub mod oracle;
pub mod tails;

use std::path::Path;

use anyhow::Result;
use kernelopt_core::algorithm::{run_batch_with, Algorithm, History, Trajectory, TrajectoryBatch};
use kernelopt_core::objectives::Objective;
use kernelopt_core::rng::horizon_seed;

use crate::config::{ExperimentConfig, Mode};
use crate::exec::Runner;

pub struct RunContext<'a> {
    pub exec: &'a Runner,
    pub out: &'a Path,
    /// `--randomized T` for the oracle.
    pub randomized: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub violations: usize,
}

pub fn run(mode: Mode, cfg: &ExperimentConfig, ctx: &RunContext<'_>) -> Result<Outcome> {
    cfg.validate(mode)?;
    match mode {
        Mode::Tails => tails::run(cfg, ctx),
        Mode::Adversarial => adversarial::run(cfg, ctx),
        Mode::Oracle => oracle::run(cfg, ctx),
        Mode::ModusPonens => modus_ponens::run(cfg, ctx),
        Mode::Cover => cover::run(cfg, ctx),
    }
}

/// The trajectories the tail estimator sees at each horizon: fresh batches
/// per `n`, or prefixes of one batch at the largest `n` in prefix mode.
pub fn horizon_batches<A: Algorithm + ?Sized>(
    cfg: &ExperimentConfig,
    exec: &Runner,
    alg: &A,
    obj: &Objective,
) -> Result<Vec<TrajectoryBatch>> {
    let seed = cfg.master_seed;
    if !cfg.prefix_mode {
        return cfg
            .n_list
            .iter()
            .map(|&n| {
                Ok(run_batch_with(
                    exec,
                    alg,
                    obj,
                    n,
                    horizon_seed(seed, n),
                    cfg.m,
                )?)
            })
            .collect();
    }
    let n_max = cfg.max_n();
    let full = run_batch_with(exec, alg, obj, n_max, horizon_seed(seed, n_max), cfg.m)?;
    cfg.n_list
        .iter()
        .map(|&n| {
            let trajectories = full
                .iter()
                .map(|t| {
                    Ok(Trajectory {
                        seed: t.seed,
                        history: History::new(
                            t.points()[..=n].to_vec(),
                            t.values()[..=n].to_vec(),
                        )?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrajectoryBatch {
                master_seed: full.master_seed,
                horizon: n,
                trajectories,
            })
        })
        .collect()
}

pub(crate) fn describe(cfg: &ExperimentConfig, alg: &str, obj: &Objective) -> Vec<String> {
    let b = obj.domain();
    vec![
        format!("algorithm: {alg}"),
        format!(
            "objective: {} (L = {}, max = {})",
            obj.name(),
            obj.lipschitz(),
            obj.known_max()
                .map_or("unknown".to_string(), |m| m.to_string())
        ),
        format!(
            "box: lo = {:?}, hi = {:?}",
            b.lo().coords(),
            b.hi().coords()
        ),
        format!(
            "n_list = {:?}, M = {}, master_seed = {}, resolution = {}, {}",
            cfg.n_list,
            cfg.m,
            cfg.master_seed,
            cfg.resolution,
            if cfg.prefix_mode {
                "prefix mode"
            } else {
                "fresh batch per n"
            }
        ),
    ]
}
