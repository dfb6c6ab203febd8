//! Compact search spaces: points, axis-aligned boxes, probe lattices and
//! finite ball covers.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{invalid, Error, Result};
use crate::math;

/// A point of the search space. Coordinates are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        Ok(Self(coords))
    }

    /// Builds a point without the finiteness check. Callers guarantee it.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Euclidean distance between two points of the same dimension.
pub fn dist(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(dist_unchecked(a, b))
}

#[inline]
pub(crate) fn dist_unchecked(a: &[f64], b: &[f64]) -> f64 {
    math::sqrt(dist_sq(a, b))
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// An axis-aligned box `[lo, hi]` with nonempty interior.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    lo: Point,
    hi: Point,
}

impl SearchBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(invalid("box must have at least one dimension"));
        }
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        let lo = Point::new(lo)?;
        let hi = Point::new(hi)?;
        if let Some(k) = (0..lo.dim()).find(|&k| lo[k] >= hi[k]) {
            return Err(invalid(format!(
                "box axis {k}: lo ({}) must be < hi ({})",
                lo[k], hi[k]
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The hypercube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(alloc::vec![lo; dim], alloc::vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &Point {
        &self.lo
    }

    pub fn hi(&self) -> &Point {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn center(&self) -> Point {
        Point::from_vec(
            self.lo
                .iter()
                .zip(self.hi.iter())
                .map(|(l, h)| 0.5 * (l + h))
                .collect(),
        )
    }

    pub fn diameter(&self) -> f64 {
        dist_unchecked(&self.lo, &self.hi)
    }

    /// Closed-box membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(self.hi.iter()))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(invalid("point lies outside the box"));
        }
        Ok(())
    }

    /// Corner of the box farthest from `x`, and its distance.
    pub fn farthest_corner(&self, x: &[f64]) -> (Point, f64) {
        let corner: Vec<f64> = x
            .iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .map(|(v, (l, h))| if v - l >= h - v { *l } else { *h })
            .collect();
        let d = dist_unchecked(&corner, x);
        (Point::from_vec(corner), d)
    }
}

/// Cells per axis of a regular lattice whose cell side does not exceed `spacing`.
fn cells_per_axis(side: f64, spacing: f64) -> usize {
    let raw = math::ceil(side / spacing);
    if raw.is_finite() && raw >= 1.0 {
        raw as usize
    } else {
        1
    }
}

/// A cell-centred axis-aligned lattice over a box, enumerated lazily in
/// lexicographic order (axis 0 most significant).
#[derive(Debug, Clone)]
pub struct ProbeLattice {
    lo: Vec<f64>,
    step: Vec<f64>,
    counts: Vec<usize>,
}

impl ProbeLattice {
    pub fn new(b: &SearchBox, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(invalid("probe spacing must be positive and finite"));
        }
        let counts: Vec<usize> = (0..b.dim())
            .map(|k| cells_per_axis(b.side(k), spacing))
            .collect();
        Ok(Self::with_counts(b, counts))
    }

    pub(crate) fn with_counts(b: &SearchBox, counts: Vec<usize>) -> Self {
        let step = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| b.side(k) / c as f64)
            .collect();
        Self {
            lo: b.lo.coords().to_vec(),
            step,
            counts,
        }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Largest per-axis cell side.
    pub fn max_step(&self) -> f64 {
        self.step.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of lattice index `j` along `axis`.
    #[inline]
    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        self.lo[axis] + (j as f64 + 0.5) * self.step[axis]
    }

    /// Writes the `index`-th lattice point into `out`.
    pub fn point_into(&self, mut index: usize, out: &mut [f64]) {
        for axis in (0..self.counts.len()).rev() {
            let c = self.counts[axis];
            out[axis] = self.coordinate(axis, index % c);
            index /= c;
        }
    }

    /// Visits every lattice point until `visit` returns `false`.
    /// Returns `false` iff the scan was stopped early.
    pub fn scan(&self, mut visit: impl FnMut(&[f64]) -> bool) -> bool {
        let mut buf = alloc::vec![0.0; self.counts.len()];
        for i in 0..self.len() {
            self.point_into(i, &mut buf);
            if !visit(&buf) {
                return false;
            }
        }
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| {
            let mut buf = alloc::vec![0.0; self.counts.len()];
            self.point_into(i, &mut buf);
            Point::from_vec(buf)
        })
    }
}

/// Deterministic lattice whose points lie within `spacing / 2` per axis of
/// every box point. A spacing wider than every side yields the box center.
pub fn probe_grid(b: &SearchBox, spacing: f64) -> Result<Vec<Point>> {
    Ok(ProbeLattice::new(b, spacing)?.iter().collect())
}

/// Relative tolerance on ball radii when validating coverage.
pub const COVER_TOLERANCE: f64 = 1e-9;

/// A finite set of centers whose closed balls of `radius` cover the box.
#[derive(Debug, Clone)]
pub struct Cover {
    radius: f64,
    centers: Vec<Point>,
    lattice: ProbeLattice,
    bbox: SearchBox,
}

impl Cover {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn search_box(&self) -> &SearchBox {
        &self.bbox
    }

    /// Distance from `x` to its nearest center, using the product structure
    /// of the center grid.
    pub fn nearest_distance(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (axis, v) in x.iter().enumerate() {
            let step = self.lattice.step[axis];
            let count = self.lattice.counts[axis];
            let rel = (v - self.lattice.lo[axis]) / step - 0.5;
            let j = if rel <= 0.0 {
                0
            } else {
                let r = libm::round(rel) as usize;
                r.min(count - 1)
            };
            let d = v - self.lattice.coordinate(axis, j);
            acc += d * d;
        }
        math::sqrt(acc)
    }

    /// Every probe point at spacing `radius / 8` has a center within
    /// `radius` (closed ball, relative tolerance [`COVER_TOLERANCE`]).
    pub fn validate(&self) -> bool {
        let probes = match ProbeLattice::new(&self.bbox, self.radius / 8.0) {
            Ok(p) => p,
            Err(_) => return false,
        };
        let limit = self.radius * (1.0 + COVER_TOLERANCE);
        probes.scan(|p| self.nearest_distance(p) <= limit)
    }
}

/// Builds a grid cover of `b` by balls of `radius`.
///
/// Per-axis spacing is `2·radius/√d`; centers sit at the cells' midpoints, so
/// the first and last ones are inset by half a cell from the faces. If the
/// probe validation fails every axis gains one more center.
pub fn build_cover(b: &SearchBox, radius: f64) -> Result<Cover> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(invalid("cover radius must be positive and finite"));
    }
    let d = b.dim();
    let spacing = 2.0 * radius / math::sqrt(d as f64);
    let mut counts: Vec<usize> = (0..d)
        .map(|k| {
            let raw = math::ceil(b.side(k) / spacing - COVER_TOLERANCE);
            if raw >= 1.0 {
                raw as usize
            } else {
                1
            }
        })
        .collect();
    loop {
        let lattice = ProbeLattice::with_counts(b, counts.clone());
        let cover = Cover {
            radius,
            centers: lattice.iter().collect(),
            lattice,
            bbox: b.clone(),
        };
        if cover.validate() {
            return Ok(cover);
        }
        for c in counts.iter_mut() {
            *c += 1;
        }
    }
}
