//! Turns config values into core objects.

use anyhow::{anyhow, bail, Context, Result};
use kernelopt_core::algorithm::{Algorithm, HistoryView};
use kernelopt_core::algorithms::{
    adalipo, cma_lite, halfspace_sampler, random_search, stuck_hill_climber, AdaLipo,
    AdaLipoParams, CmaLite, CmaLiteParams, HalfspaceSampler, RandomSearch, RegionSampling,
    StuckHillClimber,
};
use kernelopt_core::objectives::{
    f_tilde, piecewise_peak, reverse_ackley, sphere_max, BumpCoefficients, Objective,
};
use kernelopt_core::oracle::{DiscreteSpace, HistoryStat, KernelTable, Scenario};
use kernelopt_core::rng::Stream;
use kernelopt_core::space::{Point, SearchBox};

use crate::config::{
    AlgorithmParams, BumpVariant, ExperimentConfig, KernelSpec, ObjectiveParams,
    RegionSamplingConfig, ScenarioSpec, StatSpec,
};

pub fn search_box(cfg: &ExperimentConfig) -> Result<SearchBox> {
    match &cfg.bbox {
        Some(b) => SearchBox::new(b.lo.clone(), b.hi.clone()).context("table `[box]`"),
        None => Ok(SearchBox::cube(2, -2.0, 2.0)?),
    }
}

fn point(coords: &[f64], what: &str) -> Result<Point> {
    Point::new(coords.to_vec()).with_context(|| format!("field `{what}`"))
}

/// Every algorithm the runner knows.
#[derive(Debug)]
pub enum BuiltAlgorithm {
    RandomSearch(RandomSearch),
    AdaLipo(AdaLipo),
    CmaLite(CmaLite),
    Halfspace(HalfspaceSampler),
    StuckHill(StuckHillClimber),
}

impl BuiltAlgorithm {
    /// AdaLIPO draws that exhausted the rejection budget.
    pub fn fallbacks(&self) -> Option<u64> {
        match self {
            BuiltAlgorithm::AdaLipo(a) => Some(a.fallbacks()),
            _ => None,
        }
    }

    fn inner(&self) -> &dyn Algorithm {
        match self {
            BuiltAlgorithm::RandomSearch(a) => a,
            BuiltAlgorithm::AdaLipo(a) => a,
            BuiltAlgorithm::CmaLite(a) => a,
            BuiltAlgorithm::Halfspace(a) => a,
            BuiltAlgorithm::StuckHill(a) => a,
        }
    }
}

impl Algorithm for BuiltAlgorithm {
    fn name(&self) -> &str {
        self.inner().name()
    }

    fn search_box(&self) -> &SearchBox {
        self.inner().search_box()
    }

    fn sample_initial(&self, rng: &mut Stream) -> Point {
        self.inner().sample_initial(rng)
    }

    fn sample_next(
        &self,
        step: usize,
        h: HistoryView<'_>,
        rng: &mut Stream,
    ) -> kernelopt_core::Result<Point> {
        self.inner().sample_next(step, h, rng)
    }
}

pub fn algorithm(name: &str, p: &AlgorithmParams, b: &SearchBox) -> Result<BuiltAlgorithm> {
    let built = match name {
        "random_search" => BuiltAlgorithm::RandomSearch(random_search(b)),
        "adalipo" => {
            let d = AdaLipoParams::default();
            let params = AdaLipoParams {
                grid_base: p.grid_base.unwrap_or(d.grid_base),
                max_rejections: p.max_rejections.unwrap_or(d.max_rejections),
                explore_prob: p.explore_prob.unwrap_or(d.explore_prob),
                pure_exploit: p.pure_exploit.unwrap_or(d.pure_exploit),
                region_sampling: match p.region_sampling {
                    None => d.region_sampling,
                    Some(RegionSamplingConfig::Auto) => RegionSampling::Auto,
                    Some(RegionSamplingConfig::Rejection) => RegionSampling::Rejection,
                },
            };
            BuiltAlgorithm::AdaLipo(adalipo(b, params).context("table `[algorithm_params]`")?)
        }
        "cma_lite" => {
            let d = CmaLiteParams::centered(b);
            let params = CmaLiteParams {
                mean0: match &p.mean0 {
                    Some(m) => point(m, "algorithm_params.mean0")?,
                    None => d.mean0,
                },
                sigma0: p.sigma0.unwrap_or(d.sigma0),
                learning_rate_mean: p.learning_rate_mean.unwrap_or(d.learning_rate_mean),
                learning_rate_cov: p.learning_rate_cov.unwrap_or(d.learning_rate_cov),
                elite_fraction: p.elite_fraction.unwrap_or(d.elite_fraction),
            };
            BuiltAlgorithm::CmaLite(cma_lite(b, params).context("table `[algorithm_params]`")?)
        }
        "halfspace" | "halfspace_sampler" => BuiltAlgorithm::Halfspace(halfspace_sampler(b)),
        "stuck_hill" | "stuck_hill_climber" => {
            let sigma = p.step_sigma.unwrap_or(0.01);
            BuiltAlgorithm::StuckHill(
                stuck_hill_climber(b, sigma).context("field `algorithm_params.step_sigma`")?,
            )
        }
        other => bail!(
            "field `algorithm`: unknown algorithm `{other}` \
             (expected random_search, adalipo, cma_lite, halfspace or stuck_hill)"
        ),
    };
    Ok(built)
}

fn base_objective(name: &str, p: &ObjectiveParams, b: &SearchBox) -> Result<Objective> {
    Ok(match name {
        "reverse_ackley" => reverse_ackley(b),
        "sphere" | "sphere_max" => sphere_max(b),
        "piecewise_peak" => {
            let peak = match &p.peak {
                Some(c) => point(c, "objective_params.peak")?,
                None => b.center(),
            };
            piecewise_peak(b, peak).context("field `objective_params.peak`")?
        }
        other => bail!(
            "field `objective`: unknown objective `{other}` \
             (expected reverse_ackley, sphere, piecewise_peak or f_tilde(<base>))"
        ),
    })
}

pub fn coefficients(v: Option<BumpVariant>) -> BumpCoefficients {
    match v.unwrap_or_default() {
        BumpVariant::Default => BumpCoefficients::default(),
        BumpVariant::FactorThree => BumpCoefficients::factor_three(),
    }
}

/// `name` or `f_tilde(name)`.
pub fn objective(spec: &str, p: &ObjectiveParams, b: &SearchBox) -> Result<Objective> {
    let spec = spec.trim();
    if let Some(inner) = spec
        .strip_prefix("f_tilde(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let base = objective(inner, p, b)?;
        let center = point(
            p.center
                .as_deref()
                .ok_or_else(|| anyhow!("field `objective_params.center`: required by f_tilde"))?,
            "objective_params.center",
        )?;
        let eps1 = p
            .eps1
            .ok_or_else(|| anyhow!("field `objective_params.eps1`: required by f_tilde"))?;
        return f_tilde(&base, center, eps1, coefficients(p.bump)).context("f_tilde parameters");
    }
    base_objective(spec, p, b)
}

fn kernel_table(k: &KernelSpec) -> KernelTable {
    match k {
        KernelSpec::Constant(p) => KernelTable::Constant(p.clone()),
        KernelSpec::ByLastState(rows) => KernelTable::ByLastState(rows.clone()),
        KernelSpec::Switch(s) => KernelTable::Switch {
            stat: match s.stat {
                StatSpec::First => HistoryStat::First,
                StatSpec::Last => HistoryStat::Last,
                StatSpec::Max => HistoryStat::Max,
                StatSpec::Min => HistoryStat::Min,
            },
            threshold: s.threshold,
            below: Box::new(kernel_table(&s.below)),
            above: Box::new(kernel_table(&s.above)),
        },
    }
}

pub fn scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    let s = Scenario {
        space: DiscreteSpace::new(spec.labels.clone(), spec.metric.clone())?,
        nu: spec.nu.clone(),
        kernels: spec.kernels.iter().map(kernel_table).collect(),
        f: spec.f.clone(),
        g: spec.g.clone(),
        horizon: spec.horizon,
    };
    s.validate()?;
    Ok(s)
}
