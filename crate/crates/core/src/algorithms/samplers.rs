use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algorithm::Sampler;
use crate::rng::Stream;
use crate::space::{Point, SearchBox};

/// Gaussian draws outside the box are retried this many times before the
/// last one is clamped coordinatewise.
pub const GAUSSIAN_MAX_REJECTIONS: usize = 1000;

/// Uniform law on a box.
#[derive(Debug, Clone)]
pub struct UniformBox {
    bbox: SearchBox,
}

impl UniformBox {
    pub fn new(bbox: SearchBox) -> Self {
        Self { bbox }
    }

    pub fn search_box(&self) -> &SearchBox {
        &self.bbox
    }
}

impl Sampler for UniformBox {
    fn draw(&self, rng: &mut Stream) -> Point {
        let lo = self.bbox.lo();
        let hi = self.bbox.hi();
        let coords = lo
            .iter()
            .zip(hi.iter())
            .map(|(l, h)| {
                let u: f64 = rng.random();
                (l + u * (h - l)).min(*h)
            })
            .collect();
        Point::from_vec(coords)
    }
}

/// `N(mean, L·Lᵀ)` restricted to a box by rejection, then clamping.
#[derive(Debug, Clone)]
pub struct GaussianInBox<'a> {
    pub mean: &'a [f64],
    /// Lower-triangular factor, row-major `d × d`.
    pub factor: &'a [f64],
    pub bbox: &'a SearchBox,
}

impl GaussianInBox<'_> {
    fn raw(&self, rng: &mut Stream, out: &mut [f64]) {
        let d = self.mean.len();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..d {
            let row = &self.factor[i * d..i * d + i + 1];
            out[i] = self.mean[i] + row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

impl Sampler for GaussianInBox<'_> {
    fn draw(&self, rng: &mut Stream) -> Point {
        let mut x = alloc::vec![0.0; self.mean.len()];
        for _ in 0..GAUSSIAN_MAX_REJECTIONS {
            self.raw(rng, &mut x);
            if x.iter().all(|v| v.is_finite()) && self.bbox.contains(&x) {
                return Point::from_vec(x);
            }
        }
        self.raw(rng, &mut x);
        let lo = self.bbox.lo();
        let hi = self.bbox.hi();
        for (k, v) in x.iter_mut().enumerate() {
            *v = if v.is_nan() {
                lo[k]
            } else {
                v.clamp(lo[k], hi[k])
            };
        }
        Point::from_vec(x)
    }
}
