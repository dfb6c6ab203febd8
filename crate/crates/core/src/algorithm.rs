//! An optimizer as a pair (initial law, sequence of Markov kernels), and the
//! deterministic trajectory runner built on it.
//!
//! A kernel sees only the step index and the full history of points and
//! values. There is no hidden state between steps: anything an algorithm
//! wants to carry forward must be recomputed from the history.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::objectives::Objective;
use crate::rng::{stream_key, Stream};
use crate::space::{Point, SearchBox};

/// Borrowed history `((X_0..X_n), (f(X_0)..f(X_n)))`.
#[derive(Debug, Clone, Copy)]
pub struct HistoryView<'a> {
    points: &'a [Point],
    values: &'a [f64],
}

impl<'a> HistoryView<'a> {
    pub fn new(points: &'a [Point], values: &'a [f64]) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return Err(invalid(
                "history needs as many values as points, and at least one",
            ));
        }
        Ok(Self { points, values })
    }

    pub fn points(&self) -> &'a [Point] {
        self.points
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the best value; ties go to the lowest index.
    pub fn incumbent(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate().skip(1) {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn best_value(&self) -> f64 {
        self.values[self.incumbent()]
    }

    pub fn prefix(&self, len: usize) -> HistoryView<'a> {
        HistoryView {
            points: &self.points[..len],
            values: &self.values[..len],
        }
    }
}

/// Owned history.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    points: Vec<Point>,
    values: Vec<f64>,
}

impl History {
    pub fn new(points: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        HistoryView::new(&points, &values)?;
        Ok(Self { points, values })
    }

    fn with_capacity(n: usize) -> Self {
        Self {
            points: Vec::with_capacity(n),
            values: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, p: Point, v: f64) {
        self.points.push(p);
        self.values.push(v);
    }

    pub fn view(&self) -> HistoryView<'_> {
        HistoryView {
            points: &self.points,
            values: &self.values,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Executable stand-in for a probability measure on the search space.
pub trait Sampler {
    fn draw(&self, rng: &mut Stream) -> Point;
}

/// A stochastic iterative optimizer: the law of `X_0` and the kernels
/// `κ_n(history) → law of X_{n+1}`.
///
/// `sample_initial` must not depend on any objective; both methods must only
/// return points of [`Algorithm::search_box`].
pub trait Algorithm: Send + Sync {
    fn name(&self) -> &str;

    fn search_box(&self) -> &SearchBox;

    fn sample_initial(&self, rng: &mut Stream) -> Point;

    /// Draws `X_{step+1}` given a history holding `step + 1` entries.
    fn sample_next(&self, step: usize, history: HistoryView<'_>, rng: &mut Stream)
        -> Result<Point>;
}

impl<A: Algorithm + ?Sized> Algorithm for Box<A> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn search_box(&self) -> &SearchBox {
        (**self).search_box()
    }

    fn sample_initial(&self, rng: &mut Stream) -> Point {
        (**self).sample_initial(rng)
    }

    fn sample_next(
        &self,
        step: usize,
        history: HistoryView<'_>,
        rng: &mut Stream,
    ) -> Result<Point> {
        (**self).sample_next(step, history, rng)
    }
}

/// `(X_i)_{0≤i≤n}` and its evaluations, tagged with the stream key that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub history: History,
}

impl Trajectory {
    pub fn points(&self) -> &[Point] {
        self.history.points()
    }

    pub fn values(&self) -> &[f64] {
        self.history.values()
    }

    /// Horizon `n` (the trajectory holds `n + 1` points).
    pub fn horizon(&self) -> usize {
        self.history.len() - 1
    }

    pub fn view(&self) -> HistoryView<'_> {
        self.history.view()
    }
}

/// Runs `n` kernel steps from the stream keyed by `seed`.
pub fn run_trajectory<A: Algorithm + ?Sized>(
    alg: &A,
    obj: &Objective,
    n: usize,
    seed: u64,
) -> Result<Trajectory> {
    let domain = alg.search_box();
    if obj.domain() != domain {
        return Err(invalid(
            "objective and algorithm are defined on different boxes",
        ));
    }
    let mut rng = Stream::from_key(seed);
    let mut history = History::with_capacity(n + 1);
    let x0 = alg.sample_initial(&mut rng);
    if !domain.contains(&x0) {
        return Err(outside(alg, 0));
    }
    let v0 = obj.eval(&x0);
    history.push(x0, v0);
    for step in 0..n {
        let x = alg.sample_next(step, history.view(), &mut rng)?;
        if !domain.contains(&x) {
            return Err(outside(alg, step + 1));
        }
        let v = obj.eval(&x);
        history.push(x, v);
    }
    Ok(Trajectory { seed, history })
}

fn outside<A: Algorithm + ?Sized>(alg: &A, step: usize) -> Error {
    Error::OutsideBox {
        algorithm: alg.name().to_string(),
        step,
    }
}

/// Runs closures over `0..count` and returns results in index order.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// In-order, single-threaded execution.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// `M` trajectories of the same horizon, ordered by stream index.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch {
    pub master_seed: u64,
    pub horizon: usize,
    pub trajectories: Vec<Trajectory>,
}

impl TrajectoryBatch {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }
}

pub fn run_batch<A: Algorithm + ?Sized>(
    alg: &A,
    obj: &Objective,
    n: usize,
    master_seed: u64,
    m: usize,
) -> Result<TrajectoryBatch> {
    run_batch_with(&Serial, alg, obj, n, master_seed, m)
}

/// Trajectory `i` uses the stream `derive_stream(master_seed, i)`.
pub fn run_batch_with<E: Executor, A: Algorithm + ?Sized>(
    exec: &E,
    alg: &A,
    obj: &Objective,
    n: usize,
    master_seed: u64,
    m: usize,
) -> Result<TrajectoryBatch> {
    if m == 0 {
        return Err(invalid("batch size M must be at least 1"));
    }
    let results = exec.map_indexed(m, |i| {
        run_trajectory(alg, obj, n, stream_key(master_seed, i as u64))
    });
    let trajectories = results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Trajectory {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryBatch {
        master_seed,
        horizon: n,
        trajectories,
    })
}
