//! The two tail probabilities that characterize an optimizer (dispersion
//! and optimality gap), their Monte Carlo estimators, and executable
//! versions of the two proof steps that link them.

mod binomial;

pub use binomial::{beta_quantile, clopper_pearson, regularized_inc_beta};

use alloc::format;
use alloc::vec::Vec;

use crate::algorithm::{run_trajectory, Algorithm, Executor, TrajectoryBatch};
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::objectives::Objective;
use crate::rng::{horizon_seed, stream_key};
use crate::space::{dist_sq, dist_unchecked, Cover, Point, ProbeLattice, SearchBox};

/// Default confidence of every reported interval.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// `max f − max_i f(X_i)`, clamped at zero.
pub fn consistency_gap(values: &[f64], obj: &Objective) -> Result<f64> {
    let fmax = obj
        .known_max()
        .ok_or_else(|| Error::MissingMax(obj.name().into()))?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((fmax - best).max(0.0))
}

/// Worst-case error of a probe-grid dispersion at this resolution.
pub fn dispersion_error_bound(b: &SearchBox, resolution: f64) -> f64 {
    resolution * math::sqrt(b.dim() as f64) / 2.0
}

fn min_dist(points: &[Point], x: &[f64]) -> f64 {
    let best = points
        .iter()
        .map(|p| dist_sq(p, x))
        .fold(f64::INFINITY, f64::min);
    math::sqrt(best)
}

/// Probe-grid estimate of `sup_x min_i dist(X_i, x)`.
///
/// The true supremum lies in `[value, value + error_bound]` because the
/// min-distance field is 1-Lipschitz.
pub fn max_min_dist(points: &[Point], b: &SearchBox, resolution: f64) -> Result<(f64, f64)> {
    if points.is_empty() {
        return Err(invalid("dispersion of an empty point set"));
    }
    let lattice = ProbeLattice::new(b, resolution)?;
    let mut worst: f64 = 0.0;
    lattice.scan(|x| {
        worst = worst.max(min_dist(points, x));
        true
    });
    Ok((worst, dispersion_error_bound(b, resolution)))
}

/// Whether the dispersion exceeds `epsilon`, as a pair
/// `(value > ε, value + error_bound > ε)`. Stops scanning as soon as both are known.
pub fn dispersion_exceeds(
    points: &[Point],
    lattice: &ProbeLattice,
    epsilon: f64,
    error_bound: f64,
) -> (bool, bool) {
    let strict_sq = epsilon * epsilon;
    let loose = (epsilon - error_bound).max(0.0);
    let loose_sq = loose * loose;
    let (mut strict, mut conservative) = (false, false);
    lattice.scan(|x| {
        // nearest point, abandoning the probe once it is within `loose`
        let mut best = f64::INFINITY;
        for p in points {
            let d = dist_sq(p, x);
            if d < best {
                best = d;
                if best <= loose_sq {
                    return true;
                }
            }
        }
        conservative = true;
        if best > strict_sq {
            strict = true;
            return false;
        }
        true
    });
    (strict, conservative)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TailKind {
    /// `P(sup_x min_i dist(X_i, x) > ε)`
    Sampling,
    /// `P(max f − max_i f(X_i) > ε)`
    Consistency,
}

impl TailKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TailKind::Sampling => "sampling",
            TailKind::Consistency => "consistency",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailEntry {
    pub n: usize,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub m: usize,
    /// Trajectories counted in `estimate`. For sampling tails this is the
    /// conservative count (`value + error_bound > ε`).
    pub count: usize,
    /// Sampling tails only: trajectories with `value > ε`.
    pub strict_count: Option<usize>,
}

impl TailEntry {
    pub fn ci_width(&self) -> f64 {
        self.ci_hi - self.ci_lo
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve {
    pub kind: TailKind,
    pub epsilon: f64,
    pub confidence: f64,
    pub entries: Vec<TailEntry>,
}

/// How tail probabilities are estimated.
///
/// In the default mode each horizon `n` gets its own batch: trajectory `i`
/// runs on stream `derive_stream(horizon_seed(master_seed, n), i)`. In
/// prefix mode a single batch at the largest horizon is drawn with
/// `horizon_seed(master_seed, n_max)` and every smaller `n` reads its prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimator {
    pub n_list: Vec<usize>,
    pub m: usize,
    pub master_seed: u64,
    pub resolution: f64,
    pub confidence: f64,
    pub prefix_mode: bool,
}

impl TailEstimator {
    pub fn new(n_list: Vec<usize>, m: usize, master_seed: u64, resolution: f64) -> Self {
        Self {
            n_list,
            m,
            master_seed,
            resolution,
            confidence: DEFAULT_CONFIDENCE,
            prefix_mode: false,
        }
    }

    fn validate(&self, b: &SearchBox, requests: &[(TailKind, f64)]) -> Result<()> {
        if self.m == 0 {
            return Err(invalid("M must be at least 1"));
        }
        if self.n_list.is_empty() {
            return Err(invalid("n_list is empty"));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_list must be strictly increasing"));
        }
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            return Err(invalid("resolution must be positive"));
        }
        let limit = 2.0 * dispersion_error_bound(b, self.resolution);
        for &(kind, eps) in requests {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(invalid("epsilon must be positive"));
            }
            if kind == TailKind::Sampling && eps <= limit {
                return Err(invalid(format!(
                    "sampling tail at epsilon {eps} needs resolution < {} (got {})",
                    eps / math::sqrt(b.dim() as f64),
                    self.resolution
                )));
            }
        }
        Ok(())
    }

    /// Estimates every requested `(kind, ε)` tail on the same trajectories.
    pub fn curves<E: Executor, A: Algorithm + ?Sized>(
        &self,
        exec: &E,
        alg: &A,
        obj: &Objective,
        requests: &[(TailKind, f64)],
    ) -> Result<Vec<TailCurve>> {
        let b = obj.domain();
        self.validate(b, requests)?;
        if requests.iter().any(|(k, _)| *k == TailKind::Consistency) && obj.known_max().is_none() {
            return Err(Error::MissingMax(obj.name().into()));
        }
        let lattice = ProbeLattice::new(b, self.resolution)?;
        let eb = dispersion_error_bound(b, self.resolution);
        let horizons = self.n_list.len();
        let m = self.m;

        // one row of (strict, conservative) flags per request
        let evaluate = |values: &[f64], points: &[Point]| -> Vec<(bool, bool)> {
            requests
                .iter()
                .map(|&(kind, eps)| match kind {
                    TailKind::Consistency => {
                        let hit = consistency_gap(values, obj).map_or(false, |g| g > eps);
                        (hit, hit)
                    }
                    TailKind::Sampling => dispersion_exceeds(points, &lattice, eps, eb),
                })
                .collect()
        };

        // flags[h][i][r]
        let flags: Vec<Vec<Vec<(bool, bool)>>> = if self.prefix_mode {
            let n_max = *self.n_list.last().expect("nonempty");
            let seed = horizon_seed(self.master_seed, n_max);
            let per_traj = exec.map_indexed(m, |i| -> Result<Vec<Vec<(bool, bool)>>> {
                let t = run_trajectory(alg, obj, n_max, stream_key(seed, i as u64))?;
                Ok(self
                    .n_list
                    .iter()
                    .map(|&n| evaluate(&t.values()[..=n], &t.points()[..=n]))
                    .collect())
            });
            let per_traj = collect_indexed(per_traj)?;
            (0..horizons)
                .map(|h| per_traj.iter().map(|row| row[h].clone()).collect())
                .collect()
        } else {
            let cells = exec.map_indexed(horizons * m, |j| -> Result<Vec<(bool, bool)>> {
                let (h, i) = (j / m, j % m);
                let n = self.n_list[h];
                let seed = horizon_seed(self.master_seed, n);
                let t = run_trajectory(alg, obj, n, stream_key(seed, i as u64))?;
                Ok(evaluate(t.values(), t.points()))
            });
            let mut cells = collect_indexed(cells)?.into_iter();
            (0..horizons)
                .map(|_| cells.by_ref().take(m).collect())
                .collect()
        };

        requests
            .iter()
            .enumerate()
            .map(|(r, &(kind, epsilon))| {
                let entries = self
                    .n_list
                    .iter()
                    .enumerate()
                    .map(|(h, &n)| {
                        let strict = flags[h].iter().filter(|f| f[r].0).count();
                        let count = flags[h].iter().filter(|f| f[r].1).count();
                        let (ci_lo, ci_hi) =
                            clopper_pearson(count as u64, m as u64, self.confidence)?;
                        Ok(TailEntry {
                            n,
                            estimate: count as f64 / m as f64,
                            ci_lo,
                            ci_hi,
                            m,
                            count,
                            strict_count: (kind == TailKind::Sampling).then_some(strict),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(TailCurve {
                    kind,
                    epsilon,
                    confidence: self.confidence,
                    entries,
                })
            })
            .collect()
    }

    pub fn curve<E: Executor, A: Algorithm + ?Sized>(
        &self,
        exec: &E,
        alg: &A,
        obj: &Objective,
        kind: TailKind,
        epsilon: f64,
    ) -> Result<TailCurve> {
        Ok(self
            .curves(exec, alg, obj, &[(kind, epsilon)])?
            .pop()
            .expect("one request, one curve"))
    }
}

fn collect_indexed<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Trajectory {
                index,
                source: alloc::boxed::Box::new(e),
            })
        })
        .collect()
}

/// Outcome of checking `{gap > ε} ⊆ {every X_i farther than δ = ε/L from x*}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub epsilon: f64,
    pub delta: f64,
    pub trajectories: usize,
    /// Trajectories with gap > ε.
    pub gap_events: usize,
    /// Gap > ε although some X_i is within δ of the maximizer.
    pub violations: usize,
    /// Gap > ε although the grid dispersion cannot exceed δ.
    pub dispersion_violations: usize,
}

/// Checks the set inclusion behind "sampling ⇒ consistency" on every
/// trajectory of the batch, with `δ = ε / L`. Both counts must be zero.
pub fn check_modus_ponens_inclusion(
    batch: &TrajectoryBatch,
    obj: &Objective,
    epsilon: f64,
    resolution: f64,
) -> Result<InclusionReport> {
    let argmax = obj
        .known_argmax()
        .ok_or_else(|| Error::MissingArgmax(obj.name().into()))?;
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    let delta = epsilon / obj.lipschitz();
    let lattice = ProbeLattice::new(obj.domain(), resolution)?;
    let eb = dispersion_error_bound(obj.domain(), resolution);
    let mut report = InclusionReport {
        epsilon,
        delta,
        trajectories: batch.len(),
        gap_events: 0,
        violations: 0,
        dispersion_violations: 0,
    };
    for t in batch.iter() {
        if consistency_gap(t.values(), obj)? <= epsilon {
            continue;
        }
        report.gap_events += 1;
        let nearest = t
            .points()
            .iter()
            .map(|p| dist_unchecked(p, argmax))
            .fold(f64::INFINITY, f64::min);
        if nearest <= delta {
            report.violations += 1;
        }
        if !dispersion_exceeds(t.points(), &lattice, delta, eb).1 {
            report.dispersion_violations += 1;
        }
    }
    Ok(report)
}

/// Fraction of trajectories whose points all avoid the open ball
/// `B(center, radius)`, for every cover center.
pub fn ball_avoidance(batch: &TrajectoryBatch, cover: &Cover) -> Vec<f64> {
    let r = cover.radius();
    cover
        .centers()
        .iter()
        .map(|c| {
            let avoid = batch
                .iter()
                .filter(|t| t.points().iter().all(|p| dist_unchecked(p, c) >= r))
                .count();
            avoid as f64 / batch.len().max(1) as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarvedBall {
    pub index: usize,
    pub center: Point,
    pub radius: f64,
    /// Fraction of trajectories that never enter the ball.
    pub fraction: f64,
    /// `ε₂ / (2·N₁)`.
    pub threshold: f64,
}

/// The cover ball avoided most often, if its avoidance fraction is positive
/// and at least `eps2 / (2·N₁)`.
pub fn find_starved_ball(batch: &TrajectoryBatch, cover: &Cover, eps2: f64) -> Option<StarvedBall> {
    let fractions = ball_avoidance(batch, cover);
    let threshold = eps2 / (2.0 * cover.len() as f64);
    let (index, &fraction) =
        fractions
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, &f64)>, cur| match best {
                Some(b) if *b.1 >= *cur.1 => Some(b),
                _ => Some(cur),
            })?;
    if fraction <= 0.0 || fraction < threshold {
        return None;
    }
    Some(StarvedBall {
        index,
        center: cover.centers()[index].clone(),
        radius: cover.radius(),
        fraction,
        threshold,
    })
}
