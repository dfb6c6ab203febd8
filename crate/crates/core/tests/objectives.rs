use kernelopt_core::objectives::{
    f_tilde, piecewise_peak, reverse_ackley, sphere_max, BumpCoefficients, Objective,
};
use kernelopt_core::rng::derive_stream;
use kernelopt_core::space::{dist, probe_grid, Point, SearchBox};
use rand::Rng;

fn random_point(b: &SearchBox, rng: &mut impl Rng) -> Point {
    let c = (0..b.dim())
        .map(|k| b.lo()[k] + rng.random::<f64>() * b.side(k))
        .collect();
    Point::new(c).unwrap()
}

/// Largest `|f(x) − f(y)| − L·d(x, y)` over random pairs, less a rounding
/// allowance for the subtraction.
fn max_excess(
    obj: &Objective,
    lipschitz: f64,
    pairs: usize,
    seed: u64,
    near: Option<(&Point, f64)>,
) -> f64 {
    let mut rng = derive_stream(seed, 0);
    let b = obj.domain();
    let around = |rng: &mut kernelopt_core::rng::Stream, centre: &Point, width: f64| {
        let c: Vec<f64> = centre
            .iter()
            .enumerate()
            .map(|(k, v)| (v + (rng.random::<f64>() - 0.5) * width).clamp(b.lo()[k], b.hi()[k]))
            .collect();
        Point::new(c).unwrap()
    };
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let x = match near {
            Some((c, w)) => around(&mut rng, c, w),
            None => random_point(b, &mut rng),
        };
        // half the pairs are short to probe the local slope
        let y = if rng.random_bool(0.5) {
            random_point(b, &mut rng)
        } else {
            around(&mut rng, &x, 1e-3)
        };
        let (fx, fy) = (obj.eval(&x), obj.eval(&y));
        let rounding = 1e-13 * (fx.abs() + fy.abs() + 1.0);
        worst = worst.max((fx - fy).abs() - lipschitz * dist(&x, &y).unwrap() - rounding);
    }
    worst
}

fn objectives() -> Vec<Objective> {
    let line = SearchBox::cube(1, -2.0, 2.0).unwrap();
    let square = SearchBox::cube(2, -2.0, 2.0).unwrap();
    let skew = SearchBox::new(vec![-1.0, 0.5], vec![3.0, 1.5]).unwrap();
    vec![
        reverse_ackley(&line),
        reverse_ackley(&square),
        reverse_ackley(&skew),
        sphere_max(&square),
        sphere_max(&skew),
        piecewise_peak(&line, Point::new(vec![0.3]).unwrap()).unwrap(),
        piecewise_peak(&square, Point::new(vec![1.0, -0.5]).unwrap()).unwrap(),
    ]
}

#[test]
fn certified_lipschitz_constants_hold() {
    for (i, obj) in objectives().iter().enumerate() {
        let excess = max_excess(obj, obj.lipschitz(), 10_000, i as u64, None);
        assert!(
            excess <= 0.0,
            "{}: Lipschitz bound exceeded by {excess}",
            obj.name()
        );
    }
}

#[test]
fn known_max_is_attained_and_not_exceeded() {
    for obj in objectives() {
        let (Some(max), Some(argmax)) = (obj.known_max(), obj.known_argmax()) else {
            continue;
        };
        assert!((obj.eval(argmax) - max).abs() <= 1e-12, "{}", obj.name());
        let spacing = obj.domain().diameter() / 200.0;
        for p in probe_grid(obj.domain(), spacing).unwrap() {
            assert!(
                obj.eval(&p) <= max + 1e-9,
                "{} exceeds its max at {p:?}",
                obj.name()
            );
        }
    }
}

#[test]
fn reverse_ackley_without_origin_has_no_certified_max() {
    let skew = SearchBox::new(vec![-1.0, 0.5], vec![3.0, 1.5]).unwrap();
    assert!(reverse_ackley(&skew).known_max().is_none());
}

#[test]
fn peak_outside_box_is_rejected() {
    let b = SearchBox::cube(1, 0.0, 1.0).unwrap();
    assert!(piecewise_peak(&b, Point::new(vec![2.0]).unwrap()).is_err());
}

struct BumpCase {
    base: Objective,
    c: Point,
    eps1: f64,
}

fn bump_cases() -> Vec<BumpCase> {
    let unit = SearchBox::cube(1, 0.0, 1.0).unwrap();
    let square = SearchBox::cube(2, -2.0, 2.0).unwrap();
    vec![
        BumpCase {
            base: piecewise_peak(&unit, Point::new(vec![0.25]).unwrap()).unwrap(),
            c: Point::new(vec![0.75]).unwrap(),
            eps1: 0.5,
        },
        BumpCase {
            base: reverse_ackley(&square),
            c: Point::new(vec![1.5, -1.0]).unwrap(),
            eps1: 0.4,
        },
        BumpCase {
            base: sphere_max(&square),
            c: Point::new(vec![-1.9, 1.9]).unwrap(),
            eps1: 1.0,
        },
    ]
}

fn base_range(base: &Objective) -> (f64, f64) {
    base.range_bounds(base.domain().diameter() / 400.0).unwrap()
}

#[test]
fn bump_strictly_raises_the_maximum() {
    for case in bump_cases() {
        let ft = f_tilde(
            &case.base,
            case.c.clone(),
            case.eps1,
            BumpCoefficients::default(),
        )
        .unwrap();
        let (fmin, fmax) = base_range(&case.base);
        assert!(ft.eval(&case.c) - fmax >= fmax - fmin + 2.0 - 1e-9);
        assert_eq!(ft.known_argmax(), Some(&case.c));
        assert!(ft.known_max().unwrap() > fmax);
    }
}

#[test]
fn bump_lipschitz_bound() {
    for (i, case) in bump_cases().into_iter().enumerate() {
        let ft = f_tilde(
            &case.base,
            case.c.clone(),
            case.eps1,
            BumpCoefficients::default(),
        )
        .unwrap();
        // The construction uses the exact range when the base knows it and a
        // widened grid bracket otherwise; either way the height is at least
        // the one built from the true range.
        let (fmin, fmax) = base_range(&case.base);
        let height = ft.bump_height().unwrap();
        assert!(height >= 2.0 * (fmax - fmin + 1.0) - 1e-9);
        let bound = case.base.lipschitz() + 2.0 * height / case.eps1;
        assert!((ft.lipschitz() - bound).abs() <= 1e-9 * bound);
        let excess = max_excess(
            &ft,
            bound + 1e-9,
            100_000,
            100 + i as u64,
            Some((&case.c, 1.2 * case.eps1)),
        );
        assert!(excess <= 0.0, "bound exceeded by {excess}");
    }
}

#[test]
fn bump_agrees_with_base_outside_the_ball() {
    for (i, case) in bump_cases().into_iter().enumerate() {
        let ft = f_tilde(
            &case.base,
            case.c.clone(),
            case.eps1,
            BumpCoefficients::default(),
        )
        .unwrap();
        let mut rng = derive_stream(200 + i as u64, 0);
        let mut seen = 0;
        while seen < 10_000 {
            let x = random_point(ft.domain(), &mut rng);
            if dist(&x, &case.c).unwrap() >= case.eps1 / 2.0 {
                assert_eq!(ft.eval(&x).to_bits(), case.base.eval(&x).to_bits());
                seen += 1;
            }
        }
    }
}

#[test]
fn bump_is_the_cone_inside_the_ball() {
    for (i, case) in bump_cases().into_iter().enumerate() {
        for coeffs in [
            BumpCoefficients::default(),
            BumpCoefficients::factor_three(),
        ] {
            let ft = f_tilde(&case.base, case.c.clone(), case.eps1, coeffs).unwrap();
            let height = ft.bump_height().unwrap();
            let r = case.eps1 / 2.0;
            let mut rng = derive_stream(300 + i as u64, 0);
            for _ in 0..10_000 {
                let x = random_point(ft.domain(), &mut rng);
                let d = dist(&x, &case.c).unwrap();
                let lift = ft.eval(&x) - case.base.eval(&x);
                if d < r {
                    let want = height * (1.0 - d / r);
                    assert!((lift - want).abs() <= 1e-9 * height.max(1.0));
                } else {
                    assert_eq!(lift, 0.0);
                }
            }
        }
    }
}

#[test]
fn factor_three_bump_height() {
    let unit = SearchBox::cube(1, 0.0, 1.0).unwrap();
    let base = piecewise_peak(&unit, Point::new(vec![0.25]).unwrap()).unwrap();
    let ft = f_tilde(
        &base,
        Point::new(vec![0.75]).unwrap(),
        0.5,
        BumpCoefficients::factor_three(),
    )
    .unwrap();
    // range 0.75, factor 3, offset 0
    assert!((ft.bump_height().unwrap() - 2.25).abs() < 1e-12);
}

#[test]
fn bump_center_must_be_in_the_domain() {
    let unit = SearchBox::cube(1, 0.0, 1.0).unwrap();
    let base = sphere_max(&unit);
    assert!(f_tilde(
        &base,
        Point::new(vec![1.5]).unwrap(),
        0.5,
        BumpCoefficients::default()
    )
    .is_err());
    assert!(f_tilde(
        &base,
        Point::new(vec![0.5]).unwrap(),
        0.0,
        BumpCoefficients::default()
    )
    .is_err());
}
