//! AdaLIPO: uniform sampling restricted to points that could still beat the
//! best value under the current Lipschitz estimate.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::algorithm::{Algorithm, HistoryView, Sampler};
use crate::error::{invalid, Result};
use crate::math;
use crate::rng::Stream;
use crate::space::{dist_unchecked, Point, SearchBox};

use super::UniformBox;

/// How the acceptance region is sampled. Both give the uniform law on the
/// region; they differ in cost and in when the budget runs out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionSampling {
    /// On a one-dimensional box, propose uniformly on the complement of the
    /// excluded intervals and re-verify; rejection from the box otherwise.
    #[default]
    Auto,
    /// Uniform proposals on the whole box.
    Rejection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaLipoParams {
    /// `α` in the estimate grid `(1 + α)^k`.
    pub grid_base: f64,
    pub max_rejections: u64,
    /// Probability of an unconditional uniform draw. Ignored when `pure_exploit` is set.
    pub explore_prob: f64,
    /// Never explore: every step samples the acceptance region.
    pub pure_exploit: bool,
    pub region_sampling: RegionSampling,
}

impl Default for AdaLipoParams {
    fn default() -> Self {
        Self {
            grid_base: 0.01,
            max_rejections: 1_000_000,
            explore_prob: 0.1,
            pure_exploit: false,
            region_sampling: RegionSampling::Auto,
        }
    }
}

impl AdaLipoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_base > 0.0) || !self.grid_base.is_finite() {
            return Err(invalid("adalipo grid_base must be positive"));
        }
        if self.max_rejections == 0 {
            return Err(invalid("adalipo max_rejections must be at least 1"));
        }
        if !(self.explore_prob > 0.0 && self.explore_prob <= 1.0) {
            return Err(invalid(
                "adalipo explore_prob must lie in (0, 1]; use pure_exploit for 0",
            ));
        }
        Ok(())
    }
}

/// Largest pairwise slope `|f_i − f_j| / dist(X_i, X_j)`, skipping coincident points.
pub fn raw_slope(h: HistoryView<'_>) -> f64 {
    match h.points().first() {
        Some(p) if p.dim() == 1 => sorted_slope(h),
        _ => raw_slope_pairwise(h),
    }
}

/// On a line the steepest pair is always adjacent in sorted order, since any
/// chord slope is a weighted mean of the slopes in between. Points sharing a
/// coordinate are merged into their value range.
fn sorted_slope(h: HistoryView<'_>) -> f64 {
    let mut xs: Vec<(f64, f64)> = h
        .points()
        .iter()
        .zip(h.values())
        .map(|(p, v)| (p.coords()[0], *v))
        .collect();
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, f64, f64)> = Vec::with_capacity(xs.len());
    for (x, v) in xs {
        match groups.last_mut() {
            Some(g) if g.0 == x => {
                g.1 = g.1.min(v);
                g.2 = g.2.max(v);
            }
            _ => groups.push((x, v, v)),
        }
    }
    let mut best: f64 = 0.0;
    for w in groups.windows(2) {
        let d = w[1].0 - w[0].0;
        let diff = (w[1].2 - w[0].1).abs().max((w[0].2 - w[1].1).abs());
        best = best.max(diff / d);
    }
    best
}

/// Brute force over all pairs, any dimension.
pub fn raw_slope_pairwise(h: HistoryView<'_>) -> f64 {
    let (pts, vals) = (h.points(), h.values());
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in 0..i {
            let d = dist_unchecked(&pts[i], &pts[j]);
            if d > 0.0 {
                best = best.max((vals[i] - vals[j]).abs() / d);
            }
        }
    }
    best
}

/// Smallest `(1 + α)^k ≥ slope` over `k ∈ ℤ`; zero stays zero.
pub fn round_to_grid(slope: f64, alpha: f64) -> f64 {
    if slope <= 0.0 {
        return 0.0;
    }
    let base = 1.0 + alpha;
    let mut k = math::ceil(math::ln(slope) / math::ln(base)) as i32;
    while math::powi(base, k) < slope {
        k += 1;
    }
    while math::powi(base, k - 1) >= slope {
        k -= 1;
    }
    math::powi(base, k)
}

pub fn estimate_lipschitz(h: HistoryView<'_>, alpha: f64) -> f64 {
    round_to_grid(raw_slope(h), alpha)
}

/// `min_i (f(X_i) + L·dist(x, X_i)) ≥ max_i f(X_i)`.
pub fn is_potential_maximizer(x: &[f64], h: HistoryView<'_>, lipschitz: f64) -> bool {
    beats(x, h, lipschitz, h.best_value())
}

fn beats(x: &[f64], h: HistoryView<'_>, lipschitz: f64, best: f64) -> bool {
    h.points()
        .iter()
        .zip(h.values())
        .all(|(p, v)| v + lipschitz * dist_unchecked(x, p) >= best)
}

/// What a kernel draw did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipoDraw {
    Explore,
    Accept {
        lipschitz: f64,
        rejections: u64,
    },
    /// Rejection budget exhausted; the point is an unconditional uniform draw.
    Fallback {
        lipschitz: f64,
    },
}

#[derive(Debug)]
pub struct AdaLipo {
    uniform: UniformBox,
    params: AdaLipoParams,
    fallbacks: AtomicU64,
}

pub fn adalipo(b: &SearchBox, params: AdaLipoParams) -> Result<AdaLipo> {
    if !params.pure_exploit {
        params.validate()?;
    } else {
        AdaLipoParams {
            explore_prob: 1.0,
            ..params
        }
        .validate()?;
    }
    Ok(AdaLipo {
        uniform: UniformBox::new(b.clone()),
        params,
        fallbacks: AtomicU64::new(0),
    })
}

impl AdaLipo {
    pub fn params(&self) -> &AdaLipoParams {
        &self.params
    }

    /// Number of draws that fell back to uniform sampling so far.
    pub fn fallbacks(&self) -> u64 {
        self.fallbacks.load(Ordering::Relaxed)
    }

    pub fn sample_traced(&self, h: HistoryView<'_>, rng: &mut Stream) -> (Point, LipoDraw) {
        if !self.params.pure_exploit {
            let u: f64 = rng.random();
            if u < self.params.explore_prob {
                return (self.uniform.draw(rng), LipoDraw::Explore);
            }
        }
        let lipschitz = estimate_lipschitz(h, self.params.grid_base);
        self.sample_region(h, lipschitz, rng)
    }

    /// Uniform draw from the acceptance region for a given constant. Every
    /// accepted point has passed `is_potential_maximizer` as written.
    pub fn sample_region(
        &self,
        h: HistoryView<'_>,
        lipschitz: f64,
        rng: &mut Stream,
    ) -> (Point, LipoDraw) {
        let best = h.best_value();
        let one_dim = self.uniform.search_box().dim() == 1;
        let accepted = if one_dim && self.params.region_sampling == RegionSampling::Auto {
            self.sample_free_intervals(h, lipschitz, best, rng)
        } else {
            self.sample_rejection(h, lipschitz, best, rng)
        };
        match accepted {
            Some((x, rejections)) => (
                x,
                LipoDraw::Accept {
                    lipschitz,
                    rejections,
                },
            ),
            None => {
                self.fallbacks.fetch_add(1, Ordering::Relaxed);
                (self.uniform.draw(rng), LipoDraw::Fallback { lipschitz })
            }
        }
    }

    fn sample_rejection(
        &self,
        h: HistoryView<'_>,
        lipschitz: f64,
        best: f64,
        rng: &mut Stream,
    ) -> Option<(Point, u64)> {
        for rejections in 0..self.params.max_rejections {
            let x = self.uniform.draw(rng);
            if beats(&x, h, lipschitz, best) {
                return Some((x, rejections));
            }
        }
        None
    }

    /// The region on a line is the box minus the open intervals
    /// `|x − X_i| < (best − f_i) / L`. Proposals land on the complement and are
    /// re-verified, so rounding at the interval ends can only cost a redraw.
    fn sample_free_intervals(
        &self,
        h: HistoryView<'_>,
        lipschitz: f64,
        best: f64,
        rng: &mut Stream,
    ) -> Option<(Point, u64)> {
        let b = self.uniform.search_box();
        let (lo, hi) = (b.lo()[0], b.hi()[0]);
        let mut cuts: Vec<(f64, f64)> = h
            .points()
            .iter()
            .zip(h.values())
            .filter_map(|(p, v)| {
                let gap = best - v;
                if gap <= 0.0 {
                    return None;
                }
                let r = if lipschitz > 0.0 {
                    gap / lipschitz
                } else {
                    f64::INFINITY
                };
                let c = p.coords()[0];
                Some((c - r, c + r))
            })
            .collect();
        cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut free = Vec::new();
        let mut cursor = lo;
        for (a, b) in cuts {
            if a > cursor {
                free.push((cursor, a.min(hi)));
            }
            cursor = cursor.max(b);
            if cursor >= hi {
                break;
            }
        }
        if cursor < hi {
            free.push((cursor, hi));
        }
        free.retain(|(a, b)| b > a);
        let total: f64 = free.iter().map(|(a, b)| b - a).sum();
        if !(total > 0.0) {
            return None;
        }
        for rejections in 0..self.params.max_rejections {
            let mut t = rng.random::<f64>() * total;
            let mut x = free[free.len() - 1].0;
            for &(a, b) in &free {
                let len = b - a;
                if t < len {
                    x = (a + t).min(b);
                    break;
                }
                t -= len;
            }
            if beats(&[x], h, lipschitz, best) {
                return Some((Point::from_vec(alloc::vec![x]), rejections));
            }
        }
        None
    }
}

impl Algorithm for AdaLipo {
    fn name(&self) -> &str {
        "adalipo"
    }

    fn search_box(&self) -> &SearchBox {
        self.uniform.search_box()
    }

    fn sample_initial(&self, rng: &mut Stream) -> Point {
        self.uniform.draw(rng)
    }

    fn sample_next(&self, _step: usize, h: HistoryView<'_>, rng: &mut Stream) -> Result<Point> {
        Ok(self.sample_traced(h, rng).0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn pts(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|x| Point::new(vec![*x]).unwrap()).collect()
    }

    #[test]
    fn lipschitz_estimate_examples() {
        let p = pts(&[0.0, 1.0]);
        let h = HistoryView::new(&p, &[0.0, 1.0]).unwrap();
        assert_eq!(estimate_lipschitz(h, 0.01), 1.0);

        let p1 = pts(&[0.3]);
        assert_eq!(
            estimate_lipschitz(HistoryView::new(&p1, &[5.0]).unwrap(), 0.01),
            0.0
        );

        let p = pts(&[0.0, 0.5]);
        let l = estimate_lipschitz(HistoryView::new(&p, &[0.0, 2.0]).unwrap(), 0.01);
        // ⌈ln 4 / ln 1.01⌉ = 140
        assert_eq!(l, 1.01f64.powi(140));
        assert!((l - 4.0278).abs() < 1e-3);
        assert!(1.01f64.powi(139) < 4.0);
    }

    #[test]
    fn coincident_points_are_skipped() {
        let p = pts(&[0.2, 0.2, 0.2]);
        assert_eq!(
            raw_slope(HistoryView::new(&p, &[0.0, 1.0, 3.0]).unwrap()),
            0.0
        );
    }

    #[test]
    fn grid_rounding_is_tight() {
        for &s in &[1e-6, 0.37, 1.0, 2.5, 1234.5] {
            let r = round_to_grid(s, 0.05);
            assert!(r >= s && r / 1.05 < s, "s = {s}, r = {r}");
        }
    }

    #[test]
    fn acceptance_region_with_forced_constant() {
        // min(0 + 2x, 1 + 2(1 − x)) ≥ 1  ⇔  x ≥ 1/2 on [0, 1]
        let p = pts(&[0.0, 1.0]);
        let h = HistoryView::new(&p, &[0.0, 1.0]).unwrap();
        for i in 0..=1000 {
            let x = i as f64 * 1e-3;
            assert_eq!(is_potential_maximizer(&[x], h, 2.0), x >= 0.5, "x = {x}");
        }
    }

    #[test]
    fn single_point_region_contains_it() {
        let p = pts(&[0.4]);
        let h = HistoryView::new(&p, &[-3.0]).unwrap();
        assert!(is_potential_maximizer(&[0.4], h, 0.0));
        assert!(is_potential_maximizer(&[0.9], h, 7.0));
    }

    #[test]
    fn params_validation() {
        let b = SearchBox::cube(1, 0.0, 1.0).unwrap();
        let bad = AdaLipoParams {
            explore_prob: 0.0,
            ..Default::default()
        };
        assert!(adalipo(&b, bad).is_err());
        let pure = AdaLipoParams {
            explore_prob: 0.0,
            pure_exploit: true,
            ..Default::default()
        };
        assert!(adalipo(&b, pure).is_ok());
        assert!(adalipo(
            &b,
            AdaLipoParams {
                max_rejections: 0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(adalipo(
            &b,
            AdaLipoParams {
                grid_base: -1.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
