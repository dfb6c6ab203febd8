//! Concrete optimizers expressed as an initial law plus kernels.

mod adalipo;
mod cma_lite;
mod counterexamples;
mod samplers;

pub use adalipo::{
    adalipo, estimate_lipschitz, is_potential_maximizer, raw_slope, raw_slope_pairwise,
    round_to_grid, AdaLipo, AdaLipoParams, LipoDraw, RegionSampling,
};
pub use cma_lite::{cholesky, cma_lite, CmaLite, CmaLiteParams, CmaState};
pub use counterexamples::{
    halfspace_sampler, stuck_hill_climber, HalfspaceSampler, StuckHillClimber,
};
pub use samplers::{GaussianInBox, UniformBox, GAUSSIAN_MAX_REJECTIONS};

use crate::algorithm::{Algorithm, HistoryView, Sampler};
use crate::error::Result;
use crate::rng::Stream;
use crate::space::{Point, SearchBox};

/// Uniform sampling of the box at every step, ignoring the history.
#[derive(Debug, Clone)]
pub struct RandomSearch {
    uniform: UniformBox,
}

pub fn random_search(b: &SearchBox) -> RandomSearch {
    RandomSearch {
        uniform: UniformBox::new(b.clone()),
    }
}

impl Algorithm for RandomSearch {
    fn name(&self) -> &str {
        "random_search"
    }

    fn search_box(&self) -> &SearchBox {
        self.uniform.search_box()
    }

    fn sample_initial(&self, rng: &mut Stream) -> Point {
        self.uniform.draw(rng)
    }

    fn sample_next(
        &self,
        _step: usize,
        _history: HistoryView<'_>,
        rng: &mut Stream,
    ) -> Result<Point> {
        Ok(self.uniform.draw(rng))
    }
}
