//! Experiment configuration files (TOML, one experiment per file).

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Tails,
    Adversarial,
    Oracle,
    Cover,
    ModusPonens,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Tails => "tails",
            Mode::Adversarial => "adversarial",
            Mode::Oracle => "oracle",
            Mode::Cover => "cover",
            Mode::ModusPonens => "modus_ponens",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Every algorithm parameter; each algorithm reads the ones it knows.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmParams {
    pub explore_prob: Option<f64>,
    pub pure_exploit: Option<bool>,
    pub grid_base: Option<f64>,
    pub max_rejections: Option<u64>,
    /// `auto` (exact intervals on a line) or `rejection`.
    pub region_sampling: Option<RegionSamplingConfig>,
    pub mean0: Option<Vec<f64>>,
    pub sigma0: Option<f64>,
    pub learning_rate_mean: Option<f64>,
    pub learning_rate_cov: Option<f64>,
    pub elite_fraction: Option<f64>,
    pub step_sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionSamplingConfig {
    Auto,
    Rejection,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpVariant {
    #[default]
    Default,
    FactorThree,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveParams {
    /// Peak of `piecewise_peak`.
    pub peak: Option<Vec<f64>>,
    /// Bump center for `f_tilde(...)`.
    #[serde(alias = "c")]
    pub center: Option<Vec<f64>>,
    /// Bump diameter for `f_tilde(...)`.
    pub eps1: Option<f64>,
    #[serde(alias = "coefficients")]
    pub bump: Option<BumpVariant>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarialConfig {
    /// Diameter of the cover balls; the bump radius is half of it.
    pub eps1: f64,
    /// Mass threshold; defaults to the sampling tail at `eps1`.
    pub eps2: Option<f64>,
    /// Horizon of the starved-ball batch; defaults to the largest `n`.
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverConfig {
    pub radii: Vec<f64>,
}

/// Config form of a kernel table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Constant(Vec<f64>),
    ByLastState(Vec<Vec<f64>>),
    Switch(Box<SwitchSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatSpec {
    First,
    Last,
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchSpec {
    pub stat: StatSpec,
    pub threshold: f64,
    pub below: KernelSpec,
    pub above: KernelSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: Option<String>,
    pub labels: Vec<String>,
    pub metric: Vec<Vec<f64>>,
    pub nu: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Option<Vec<f64>>,
    pub horizon: usize,
    pub kernels: Vec<KernelSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub randomized: usize,
    #[serde(default = "default_four")]
    pub max_states: usize,
    #[serde(default = "default_four")]
    pub max_horizon: usize,
    #[serde(default = "default_one")]
    pub lemma_instances: usize,
    #[serde(default = "default_mc_events")]
    pub mc_events: usize,
    #[serde(default = "default_mc_paths")]
    pub mc_paths: usize,
    #[serde(default)]
    pub scenario: Vec<ScenarioSpec>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            randomized: 0,
            max_states: 4,
            max_horizon: 4,
            lemma_instances: 1,
            mc_events: default_mc_events(),
            mc_paths: default_mc_paths(),
            scenario: Vec::new(),
        }
    }
}

fn default_four() -> usize {
    4
}

fn default_one() -> usize {
    1
}

fn default_mc_events() -> usize {
    50
}

fn default_mc_paths() -> usize {
    100_000
}

fn default_resolution() -> f64 {
    0.01
}

fn default_confidence() -> f64 {
    kernelopt_core::metrics::DEFAULT_CONFIDENCE
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
    #[serde(default)]
    pub algorithm_params: AlgorithmParams,
    #[serde(default = "default_objective")]
    pub objective: String,
    #[serde(default)]
    pub objective_params: ObjectiveParams,
    #[serde(rename = "box")]
    pub bbox: Option<BoxConfig>,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub prefix_mode: bool,
    /// Also write every trajectory batch as CSV.
    #[serde(default)]
    pub dump_batches: bool,
    /// Also draw SVG line charts next to the plot data.
    #[serde(default)]
    pub svg: bool,
    pub adversarial: Option<AdversarialConfig>,
    pub cover: Option<CoverConfig>,
    pub oracle: Option<OracleConfig>,
}

fn default_algorithm() -> String {
    "random_search".into()
}

fn default_objective() -> String {
    "reverse_ackley".into()
}

fn default_m() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Checks the fields every mode shares, plus the ones `mode` needs.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if let Some(m) = self.mode {
            if m != mode {
                bail!("config is for mode `{m}` but `{mode}` was requested");
            }
        }
        if self.m == 0 {
            bail!("field `M`: must be at least 1");
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            bail!("field `n_list`: must be strictly increasing");
        }
        if let Some(e) = self
            .epsilons
            .iter()
            .find(|e| !(**e > 0.0) || !e.is_finite())
        {
            bail!("field `epsilons`: {e} is not a positive number");
        }
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            bail!("field `resolution`: must be positive");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            bail!("field `confidence`: must lie in (0, 1)");
        }
        let needs_runs = matches!(mode, Mode::Tails | Mode::Adversarial | Mode::ModusPonens);
        if needs_runs && self.n_list.is_empty() {
            bail!("field `n_list`: must list at least one horizon");
        }
        if matches!(mode, Mode::Tails | Mode::ModusPonens) && self.epsilons.is_empty() {
            bail!("field `epsilons`: must list at least one value");
        }
        match mode {
            Mode::Adversarial => {
                let a = self
                    .adversarial
                    .as_ref()
                    .context("table `[adversarial]`: required in adversarial mode")?;
                if !(a.eps1 > 0.0) {
                    bail!("field `adversarial.eps1`: must be positive");
                }
                if let Some(e2) = a.eps2 {
                    if !(e2 > 0.0 && e2 <= 1.0) {
                        bail!("field `adversarial.eps2`: must lie in (0, 1]");
                    }
                }
            }
            Mode::Cover => {
                let c = self
                    .cover
                    .as_ref()
                    .context("table `[cover]`: required in cover mode")?;
                if c.radii.is_empty() || c.radii.iter().any(|r| !(*r > 0.0)) {
                    bail!("field `cover.radii`: must list positive radii");
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn max_n(&self) -> usize {
        self.n_list.last().copied().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let c = ExperimentConfig::from_toml(
            r#"
            mode = "tails"
            algorithm = "adalipo"
            objective = "f_tilde(piecewise_peak)"
            n_list = [10, 50]
            M = 20
            epsilons = [0.1, 0.3]
            master_seed = 7

            [algorithm_params]
            explore_prob = 0.2
            region_sampling = "rejection"

            [objective_params]
            peak = [0.25]
            center = [0.75]
            eps1 = 0.5
            bump = "factor_three"

            [box]
            lo = [0.0]
            hi = [1.0]
            "#,
        )
        .unwrap();
        assert_eq!(c.mode, Some(Mode::Tails));
        assert_eq!(c.m, 20);
        assert_eq!(c.objective_params.bump, Some(BumpVariant::FactorThree));
        assert_eq!(
            c.algorithm_params.region_sampling,
            Some(RegionSamplingConfig::Rejection)
        );
        c.validate(Mode::Tails).unwrap();
        assert!(c.validate(Mode::Cover).is_err());
    }

    #[test]
    fn reports_the_offending_field() {
        let err = ExperimentConfig::from_toml("n_list = [10, 5]\nM = 3\nepsilons = [0.1]")
            .unwrap()
            .validate(Mode::Tails)
            .unwrap_err();
        assert!(err.to_string().contains("n_list"));
        let err = ExperimentConfig::from_toml("epsilons = [0.1]\nn_list = []")
            .unwrap()
            .validate(Mode::Tails)
            .unwrap_err();
        assert!(err.to_string().contains("n_list"));
        let err = ExperimentConfig::from_toml("M = 3\nmystery = 1").unwrap_err();
        let text = format!("{err:#}");
        assert!(
            text.contains("mystery") && text.contains("line 2"),
            "{text}"
        );
    }

    #[test]
    fn parses_oracle_scenarios() {
        let c = ExperimentConfig::from_toml(
            r#"
            [oracle]
            [[oracle.scenario]]
            labels = ["a", "b"]
            metric = [[0.0, 1.0], [1.0, 0.0]]
            nu = [0.5, 0.5]
            f = [0.0, 1.0]
            horizon = 2
            kernels = [
              { constant = [0.5, 0.5] },
              { switch = { stat = "max", threshold = 0.5, below = { by_last_state = [[1.0, 0.0], [0.0, 1.0]] }, above = { constant = [0.5, 0.5] } } },
            ]
            "#,
        )
        .unwrap();
        let o = c.oracle.unwrap();
        assert_eq!(o.scenario.len(), 1);
        assert!(matches!(o.scenario[0].kernels[1], KernelSpec::Switch(_)));
        assert_eq!(o.mc_events, 50);
    }
}
