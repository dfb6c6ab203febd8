//! Optimizers that do not sample the whole box.

use alloc::vec;
use alloc::vec::Vec;

use crate::algorithm::{Algorithm, HistoryView, Sampler};
use crate::error::{invalid, Result};
use crate::rng::Stream;
use crate::space::{Point, SearchBox};

use super::{GaussianInBox, UniformBox};

/// Uniform on the lower half `[lo, lo + (hi − lo)/2]` of every axis, forever.
#[derive(Debug, Clone)]
pub struct HalfspaceSampler {
    bbox: SearchBox,
    half: UniformBox,
}

pub fn halfspace_sampler(b: &SearchBox) -> HalfspaceSampler {
    let hi: Vec<f64> = (0..b.dim()).map(|k| b.lo()[k] + b.side(k) / 2.0).collect();
    let half = SearchBox::new(b.lo().coords().to_vec(), hi).expect("half of a valid box is valid");
    HalfspaceSampler {
        bbox: b.clone(),
        half: UniformBox::new(half),
    }
}

impl HalfspaceSampler {
    pub fn support(&self) -> &SearchBox {
        self.half.search_box()
    }
}

impl Algorithm for HalfspaceSampler {
    fn name(&self) -> &str {
        "halfspace"
    }

    fn search_box(&self) -> &SearchBox {
        &self.bbox
    }

    fn sample_initial(&self, rng: &mut Stream) -> Point {
        self.half.draw(rng)
    }

    fn sample_next(&self, _step: usize, _h: HistoryView<'_>, rng: &mut Stream) -> Result<Point> {
        Ok(self.half.draw(rng))
    }
}

/// Gaussian steps of fixed width around the incumbent best point.
#[derive(Debug, Clone)]
pub struct StuckHillClimber {
    uniform: UniformBox,
    factor: Vec<f64>,
}

pub fn stuck_hill_climber(b: &SearchBox, step_sigma: f64) -> Result<StuckHillClimber> {
    if !(step_sigma > 0.0) || !step_sigma.is_finite() {
        return Err(invalid("step_sigma must be positive"));
    }
    let d = b.dim();
    let mut factor = vec![0.0; d * d];
    for i in 0..d {
        factor[i * d + i] = step_sigma;
    }
    Ok(StuckHillClimber {
        uniform: UniformBox::new(b.clone()),
        factor,
    })
}

impl StuckHillClimber {
    pub fn step_sigma(&self) -> f64 {
        self.factor[0]
    }
}

impl Algorithm for StuckHillClimber {
    fn name(&self) -> &str {
        "stuck_hill"
    }

    fn search_box(&self) -> &SearchBox {
        self.uniform.search_box()
    }

    fn sample_initial(&self, rng: &mut Stream) -> Point {
        self.uniform.draw(rng)
    }

    fn sample_next(&self, _step: usize, h: HistoryView<'_>, rng: &mut Stream) -> Result<Point> {
        let best = &h.points()[h.incumbent()];
        Ok(GaussianInBox {
            mean: best.coords(),
            factor: &self.factor,
            bbox: self.uniform.search_box(),
        }
        .draw(rng))
    }
}
