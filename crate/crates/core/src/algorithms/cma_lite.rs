//! A Gaussian kernel whose mean and covariance are smoothed elite statistics
//! of the history. Every call rebuilds the statistics from scratch.

use alloc::vec;
use alloc::vec::Vec;

use crate::algorithm::{Algorithm, HistoryView, Sampler};
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::rng::Stream;
use crate::space::{Point, SearchBox};

use super::GaussianInBox;

/// Ridge added to every elite covariance.
pub const COV_REGULARIZER: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CmaLiteParams {
    pub mean0: Point,
    pub sigma0: f64,
    pub learning_rate_mean: f64,
    pub learning_rate_cov: f64,
    pub elite_fraction: f64,
}

impl CmaLiteParams {
    /// Box center, a quarter of the widest side, and moderate rates.
    pub fn centered(b: &SearchBox) -> Self {
        let widest = (0..b.dim()).map(|k| b.side(k)).fold(0.0, f64::max);
        Self {
            mean0: b.center(),
            sigma0: widest / 4.0,
            learning_rate_mean: 0.5,
            learning_rate_cov: 0.3,
            elite_fraction: 0.25,
        }
    }

    fn validate(&self, b: &SearchBox) -> Result<()> {
        b.check_point(&self.mean0)?;
        if !(self.sigma0 > 0.0) || !self.sigma0.is_finite() {
            return Err(invalid("cma_lite sigma0 must be positive"));
        }
        for (name, v) in [
            ("learning_rate_mean", self.learning_rate_mean),
            ("learning_rate_cov", self.learning_rate_cov),
            ("elite_fraction", self.elite_fraction),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(alloc::format!(
                    "cma_lite {name} must lie in (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Mean and row-major covariance of the search distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CmaState {
    pub mean: Vec<f64>,
    pub cov: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CmaLite {
    bbox: SearchBox,
    params: CmaLiteParams,
    initial_factor: Vec<f64>,
}

pub fn cma_lite(b: &SearchBox, params: CmaLiteParams) -> Result<CmaLite> {
    params.validate(b)?;
    let d = b.dim();
    let mut initial_factor = vec![0.0; d * d];
    for i in 0..d {
        initial_factor[i * d + i] = params.sigma0;
    }
    Ok(CmaLite {
        bbox: b.clone(),
        params,
        initial_factor,
    })
}

/// Lower Cholesky factor of a symmetric row-major matrix.
pub fn cholesky(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
            if i == j {
                let diag = a[i * d + i] - s;
                if !(diag > 0.0) || !diag.is_finite() {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * d + i] = math::sqrt(diag);
            } else {
                l[i * d + j] = (a[i * d + j] - s) / l[j * d + j];
            }
        }
    }
    Ok(l)
}

impl CmaLite {
    pub fn params(&self) -> &CmaLiteParams {
        &self.params
    }

    /// Replays the updates over prefixes of length `1..=len(h)`.
    pub fn state(&self, h: HistoryView<'_>) -> CmaState {
        let d = self.bbox.dim();
        let p = &self.params;
        let mut mean = p.mean0.coords().to_vec();
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            cov[i * d + i] = p.sigma0 * p.sigma0;
        }
        let mut order: Vec<usize> = Vec::with_capacity(h.len());
        for len in 1..=h.len() {
            let prefix = h.prefix(len);
            order.clear();
            order.extend(0..len);
            let vals = prefix.values();
            // stable: ties keep the lower index first
            order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
            let elite = (math::ceil(p.elite_fraction * len as f64) as usize).clamp(1, len);
            let chosen = &order[..elite];

            let mut em = vec![0.0; d];
            for &i in chosen {
                for (m, x) in em.iter_mut().zip(prefix.points()[i].iter()) {
                    *m += x;
                }
            }
            em.iter_mut().for_each(|m| *m /= elite as f64);

            let mut ec = vec![0.0; d * d];
            for &i in chosen {
                let x = &prefix.points()[i];
                for r in 0..d {
                    for c in 0..d {
                        ec[r * d + c] += (x[r] - em[r]) * (x[c] - em[c]);
                    }
                }
            }
            for r in 0..d {
                for c in 0..d {
                    ec[r * d + c] /= elite as f64;
                }
                ec[r * d + r] += COV_REGULARIZER;
            }

            for (m, e) in mean.iter_mut().zip(&em) {
                *m = (1.0 - p.learning_rate_mean) * *m + p.learning_rate_mean * e;
            }
            for (s, e) in cov.iter_mut().zip(&ec) {
                *s = (1.0 - p.learning_rate_cov) * *s + p.learning_rate_cov * e;
            }
        }
        CmaState { mean, cov }
    }
}

impl Algorithm for CmaLite {
    fn name(&self) -> &str {
        "cma_lite"
    }

    fn search_box(&self) -> &SearchBox {
        &self.bbox
    }

    fn sample_initial(&self, rng: &mut Stream) -> Point {
        GaussianInBox {
            mean: self.params.mean0.coords(),
            factor: &self.initial_factor,
            bbox: &self.bbox,
        }
        .draw(rng)
    }

    fn sample_next(&self, _step: usize, h: HistoryView<'_>, rng: &mut Stream) -> Result<Point> {
        let state = self.state(h);
        let factor = cholesky(&state.cov, self.bbox.dim())?;
        Ok(GaussianInBox {
            mean: &state.mean,
            factor: &factor,
            bbox: &self.bbox,
        }
        .draw(rng))
    }
}
