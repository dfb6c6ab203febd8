use kernelopt_core::space::{build_cover, dist, probe_grid, SearchBox, COVER_TOLERANCE};
use proptest::prelude::*;

fn box_strategy() -> impl Strategy<Value = SearchBox> {
    prop::collection::vec((-3.0f64..3.0, 0.1f64..3.0), 1..=3).prop_map(|axes| {
        let lo = axes.iter().map(|(l, _)| *l).collect();
        let hi = axes.iter().map(|(l, w)| l + w).collect();
        SearchBox::new(lo, hi).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cover_is_sound(b in box_strategy(), frac in 0.15f64..1.5) {
        let r = frac * b.diameter() / 2.0;
        let cover = build_cover(&b, r).unwrap();
        for p in probe_grid(&b, r / 8.0).unwrap() {
            let nearest = cover
                .centers()
                .iter()
                .map(|c| dist(c, &p).unwrap())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(nearest <= r * (1.0 + COVER_TOLERANCE));
            prop_assert!((cover.nearest_distance(&p) - nearest).abs() <= 1e-12);
        }
        for c in cover.centers() {
            prop_assert!(b.contains(c));
        }
    }

    #[test]
    fn cover_is_monotone_in_radius(b in box_strategy(), frac in 0.05f64..1.0, shrink in 0.1f64..1.0) {
        let r = frac * b.diameter() / 2.0;
        let big = build_cover(&b, r).unwrap();
        let small = build_cover(&b, r * shrink).unwrap();
        prop_assert!(small.len() >= big.len());
    }

    #[test]
    fn constructions_are_pure(b in box_strategy(), frac in 0.05f64..1.0) {
        let r = frac * b.diameter() / 2.0;
        let (c1, c2) = (build_cover(&b, r).unwrap(), build_cover(&b, r).unwrap());
        prop_assert_eq!(c1.centers(), c2.centers());
        prop_assert_eq!(probe_grid(&b, r).unwrap(), probe_grid(&b, r).unwrap());
    }

    #[test]
    fn probe_grid_covers_its_cells(b in box_strategy(), spacing in 0.05f64..1.0) {
        let grid = probe_grid(&b, spacing).unwrap();
        for p in &grid {
            prop_assert!(b.contains(p));
        }
        // every corner is within half a cell diagonal of a probe
        let half_diag = (0..b.dim()).map(|k| {
            let cells = (b.side(k) / spacing).ceil().max(1.0);
            (b.side(k) / cells / 2.0).powi(2)
        }).sum::<f64>().sqrt();
        let (corner, _) = b.farthest_corner(&b.center());
        let nearest = grid.iter().map(|p| dist(p, &corner).unwrap()).fold(f64::INFINITY, f64::min);
        prop_assert!(nearest <= half_diag + 1e-12);
    }
}
