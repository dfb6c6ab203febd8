use std::sync::Mutex;

use kernelopt_core::algorithm::{
    run_batch, run_trajectory, Algorithm, Executor, HistoryView, Sampler, Serial,
};
use kernelopt_core::algorithms::{random_search, UniformBox};
use kernelopt_core::objectives::{piecewise_peak, reverse_ackley, sphere_max};
use kernelopt_core::rng::{stream_key, Stream};
use kernelopt_core::space::{Point, SearchBox};
use kernelopt_core::Error;

fn square() -> SearchBox {
    SearchBox::cube(2, -2.0, 2.0).unwrap()
}

/// Records every history handed to the kernel.
struct Spy {
    inner: UniformBox,
    seen: Mutex<Vec<(usize, Vec<Point>, Vec<f64>)>>,
}

impl Algorithm for Spy {
    fn name(&self) -> &str {
        "spy"
    }

    fn search_box(&self) -> &SearchBox {
        self.inner.search_box()
    }

    fn sample_initial(&self, rng: &mut Stream) -> Point {
        self.inner.draw(rng)
    }

    fn sample_next(
        &self,
        step: usize,
        h: HistoryView<'_>,
        rng: &mut Stream,
    ) -> kernelopt_core::Result<Point> {
        self.seen
            .lock()
            .unwrap()
            .push((step, h.points().to_vec(), h.values().to_vec()));
        Ok(self.inner.draw(rng))
    }
}

/// Ignores the box it claims.
struct Escapee(SearchBox);

impl Algorithm for Escapee {
    fn name(&self) -> &str {
        "escapee"
    }

    fn search_box(&self) -> &SearchBox {
        &self.0
    }

    fn sample_initial(&self, _rng: &mut Stream) -> Point {
        self.0.center()
    }

    fn sample_next(
        &self,
        _s: usize,
        _h: HistoryView<'_>,
        _rng: &mut Stream,
    ) -> kernelopt_core::Result<Point> {
        Ok(Point::new(vec![100.0; self.0.dim()]).unwrap())
    }
}

#[test]
fn initial_point_does_not_depend_on_the_objective() {
    let b = square();
    let alg = random_search(&b);
    let f = reverse_ackley(&b);
    let g = sphere_max(&b);
    for seed in 0..50 {
        let a = run_trajectory(&alg, &f, 0, seed).unwrap();
        let c = run_trajectory(&alg, &g, 0, seed).unwrap();
        assert_eq!(a.points(), c.points());
    }
}

#[test]
fn kernel_sees_exact_prefix() {
    let b = square();
    let spy = Spy {
        inner: UniformBox::new(b.clone()),
        seen: Mutex::new(Vec::new()),
    };
    let obj = reverse_ackley(&b);
    let t = run_trajectory(&spy, &obj, 6, 9).unwrap();
    let seen = spy.seen.into_inner().unwrap();
    assert_eq!(seen.len(), 6);
    for (k, (step, pts, vals)) in seen.iter().enumerate() {
        assert_eq!(*step, k);
        assert_eq!(pts.as_slice(), &t.points()[..k + 1]);
        assert_eq!(vals.as_slice(), &t.values()[..k + 1]);
    }
}

#[test]
fn values_are_objective_evaluations() {
    let b = square();
    let obj = piecewise_peak(&b, Point::new(vec![0.5, -0.5]).unwrap()).unwrap();
    let t = run_trajectory(&random_search(&b), &obj, 20, 3).unwrap();
    assert_eq!(t.horizon(), 20);
    for (p, v) in t.points().iter().zip(t.values()) {
        assert_eq!(obj.eval(p), *v);
    }
}

#[test]
fn deterministic_per_seed() {
    let b = square();
    let alg = random_search(&b);
    let obj = reverse_ackley(&b);
    assert_eq!(
        run_trajectory(&alg, &obj, 30, 77).unwrap(),
        run_trajectory(&alg, &obj, 30, 77).unwrap()
    );
    assert_ne!(
        run_trajectory(&alg, &obj, 30, 77).unwrap().points(),
        run_trajectory(&alg, &obj, 30, 78).unwrap().points()
    );
}

#[test]
fn escaping_kernel_is_reported() {
    let b = square();
    let obj = reverse_ackley(&b);
    match run_trajectory(&Escapee(b.clone()), &obj, 3, 0) {
        Err(Error::OutsideBox { step, .. }) => assert_eq!(step, 1),
        other => panic!("expected OutsideBox, got {other:?}"),
    }
    assert!(run_trajectory(&Escapee(b.clone()), &obj, 0, 0).is_ok());
    assert!(matches!(
        run_batch(&Escapee(b), &obj, 3, 0, 4),
        Err(Error::Trajectory { index: 0, .. })
    ));
}

#[test]
fn mismatched_boxes_are_rejected() {
    let alg = random_search(&square());
    let obj = reverse_ackley(&SearchBox::cube(2, -1.0, 1.0).unwrap());
    assert!(run_trajectory(&alg, &obj, 1, 0).is_err());
}

#[test]
fn batch_examples() {
    let b = square();
    let alg = random_search(&b);
    let obj = reverse_ackley(&b);
    let one = run_batch(&alg, &obj, 5, 11, 1).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(
        one.trajectories[0],
        run_trajectory(&alg, &obj, 5, stream_key(11, 0)).unwrap()
    );

    let many = run_batch(&alg, &obj, 5, 11, 64).unwrap();
    for (i, t) in many.iter().enumerate() {
        assert_eq!(t.seed, stream_key(11, i as u64));
    }
    let firsts: std::collections::HashSet<_> =
        many.iter().map(|t| t.points()[0][0].to_bits()).collect();
    assert_eq!(firsts.len(), 64);

    assert!(run_batch(&alg, &obj, 5, 11, 0).is_err());
}

/// Runs indices in reverse to show results do not depend on scheduling.
struct Backwards;

impl Executor for Backwards {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let mut out: Vec<(usize, T)> = (0..count).rev().map(|i| (i, f(i))).collect();
        out.reverse();
        out.into_iter().map(|(_, t)| t).collect()
    }
}

#[test]
fn batch_is_schedule_independent() {
    let b = square();
    let alg = random_search(&b);
    let obj = reverse_ackley(&b);
    let a = kernelopt_core::algorithm::run_batch_with(&Serial, &alg, &obj, 10, 5, 20).unwrap();
    let c = kernelopt_core::algorithm::run_batch_with(&Backwards, &alg, &obj, 10, 5, 20).unwrap();
    assert_eq!(a, c);
}

#[test]
fn golden_random_search_trajectory() {
    // Uniform draws are lo + u·(hi − lo) with u the top 53 bits of the
    // xoshiro256++ output scaled by 2⁻⁵³.
    let b = SearchBox::cube(1, 0.0, 1.0).unwrap();
    let obj = piecewise_peak(&b, Point::new(vec![0.5]).unwrap()).unwrap();
    let t = run_trajectory(&random_search(&b), &obj, 0, stream_key(0, 0)).unwrap();
    let u = (0x53175D61490B23DFu64 >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    assert_eq!(t.points()[0][0], u);
}
