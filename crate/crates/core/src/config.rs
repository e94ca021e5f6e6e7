//! Run configuration, read from TOML. Every run writes its fully resolved form back out
//! as `manifest.toml`, which is itself a valid configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::baselines::{default_grid, GridSearchConfig, MomentKind, PowerDecaySchedule, DEFAULT_GAMMA};
use crate::error::{Error, Result};
use crate::io::read_libsvm;
use crate::langevin::{InitDist, LangevinSampler};
use crate::svgd::StepSchedule;
use crate::targets::{BayesLogReg, Dataset, DiagGaussian, FamilySpec, GaussianMixture, TargetDensity};
use crate::TrainConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root seed; overrides `train.seed`.
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub target: Option<TargetSpec>,
    pub family: Option<FamilySpec>,
    pub sampler: SamplerSpec,
    pub train: TrainConfig,
    pub svgd: SvgdConfig,
    pub eval: EvalConfig,
    pub baseline: BaselineConfig,
    /// Written by runs; ignored on load.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestInfo>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInfo {
    pub command: String,
    pub crate_version: String,
    pub checkpoint_format: u32,
}

/// A single fixed target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Gaussian {
        mean: Vec<f64>,
        std: Vec<f64>,
    },
    Gmm {
        means: Vec<Vec<f64>>,
        sigma: f64,
    },
    /// Posterior over weights given libsvm files.
    Logreg {
        train: PathBuf,
        test: Option<PathBuf>,
        #[serde(default)]
        features: Option<usize>,
        #[serde(default = "one")]
        prior_precision: f64,
        #[serde(default = "hundred")]
        minibatch: usize,
        #[serde(default = "yes")]
        bias: bool,
    },
}

fn one() -> f64 {
    1.0
}
fn hundred() -> usize {
    100
}
fn yes() -> bool {
    true
}

/// A built single target, with the test split for posteriors.
pub struct BuiltTarget {
    pub target: Arc<dyn TargetDensity>,
    pub test: Option<Arc<Dataset>>,
    pub name: &'static str,
}

impl TargetSpec {
    pub fn build(&self) -> Result<BuiltTarget> {
        let cfg = |e: Error| Error::Config(e.to_string());
        Ok(match self {
            TargetSpec::Gaussian { mean, std } => {
                if mean.len() != std.len() {
                    return Err(Error::Config("gaussian mean and std lengths differ".into()));
                }
                let var = std.iter().map(|s| s * s).collect();
                BuiltTarget {
                    target: Arc::new(DiagGaussian::new(mean.clone(), var).map_err(cfg)?),
                    test: None,
                    name: "gaussian",
                }
            }
            TargetSpec::Gmm { means, sigma } => BuiltTarget {
                target: Arc::new(GaussianMixture::new(means.clone(), *sigma).map_err(cfg)?),
                test: None,
                name: "gmm",
            },
            TargetSpec::Logreg {
                train,
                test,
                features,
                prior_precision,
                minibatch,
                bias,
            } => {
                let load = |p: &Path| -> Result<Dataset> {
                    let d = read_libsvm(p, *features)?.into_dataset()?;
                    Ok(if *bias { d.with_bias() } else { d })
                };
                let tr = load(train)?;
                let te = test.as_deref().map(load).transpose()?;
                if let Some(te) = &te {
                    if te.dim() != tr.dim() {
                        return Err(Error::Config(format!(
                            "train has {} features but test has {}; set `features`",
                            tr.dim(),
                            te.dim()
                        )));
                    }
                }
                let post = BayesLogReg::new(Arc::new(tr), *prior_precision, *minibatch).map_err(cfg)?;
                BuiltTarget {
                    target: Arc::new(post),
                    test: te.map(Arc::new),
                    name: "logreg",
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSpec {
    pub steps: usize,
    /// Defaults to `steps`, one block.
    pub block_size: Option<usize>,
    pub scalar_steps: bool,
    pub init_log_step: f64,
    pub init: InitDist,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            steps: 10,
            block_size: None,
            scalar_steps: false,
            init_log_step: LangevinSampler::DEFAULT_LOG_STEP,
            init: InitDist::StandardNormal,
        }
    }
}

impl SamplerSpec {
    pub fn build(&self, dim: usize) -> Result<LangevinSampler> {
        let k = self.block_size.unwrap_or(self.steps);
        let width = if self.scalar_steps { 1 } else { dim };
        let lambda = vec![self.init_log_step; self.steps * width];
        LangevinSampler::with_lambda(self.steps, dim, k, self.scalar_steps, lambda, self.init)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvgdConfig {
    pub particles: usize,
    pub iterations: usize,
    pub schedule: StepSchedule,
    pub alpha: f64,
    /// Dump particles every this many iterations (and at the end); 0 dumps only the ends.
    pub snapshot_every: usize,
    pub init: InitDist,
}

impl Default for SvgdConfig {
    fn default() -> Self {
        Self {
            particles: 100,
            iterations: 500,
            schedule: StepSchedule::adagrad(0.1),
            alpha: 0.0,
            snapshot_every: 100,
            init: InitDist::StandardNormal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// A trained Langevin checkpoint; exclusive with `schedule`.
    pub checkpoint: Option<PathBuf>,
    pub schedule: Option<PowerDecaySchedule>,
    /// `T` for a schedule.
    pub steps: usize,
    pub specs: Vec<MomentKind>,
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    /// Posterior samples per dataset for classification.
    pub samples: usize,
    pub method: Option<String>,
    pub refine_steps: usize,
    pub refine: PowerDecaySchedule,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            checkpoint: None,
            schedule: None,
            steps: 10,
            specs: vec![MomentKind::Identity, MomentKind::Square, MomentKind::Cosine],
            sample_sizes: vec![100, 1000],
            trials: 20,
            samples: 100,
            method: None,
            refine_steps: 0,
            refine: PowerDecaySchedule::new(-2, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub steps: usize,
    pub gamma: f64,
    pub train_draws: usize,
    pub n: usize,
    /// `[a, b]` pairs; defaults to the full 9 × 10 grid.
    pub cells: Option<Vec<[i32; 2]>>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        let g = GridSearchConfig::default();
        Self {
            steps: 10,
            gamma: DEFAULT_GAMMA,
            train_draws: g.train_draws,
            n: g.n,
            cells: None,
        }
    }
}

impl BaselineConfig {
    pub fn grid(&self) -> Vec<(i32, i32)> {
        match &self.cells {
            Some(c) => c.iter().map(|[a, b]| (*a, *b)).collect(),
            None => default_grid(),
        }
    }

    pub fn search(&self, seed: u64) -> GridSearchConfig {
        GridSearchConfig {
            gamma: self.gamma,
            train_draws: self.train_draws,
            n: self.n,
            seed,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Propagates the root seed and checks everything that can be checked without data.
    pub fn resolve(mut self) -> Result<Self> {
        self.train.seed = self.seed;
        self.manifest = None;
        self.train.validate()?;
        if let Some(f) = &self.family {
            f.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.target.is_some() && self.family.is_some() {
            return Err(Error::Config("set either [target] or [family], not both".into()));
        }
        if self.sampler.steps == 0 {
            return Err(Error::Config("sampler.steps must be at least 1".into()));
        }
        if self.svgd.particles == 0 {
            return Err(Error::Config("svgd.particles must be at least 1".into()));
        }
        if self.eval.trials == 0 || self.eval.samples == 0 || self.eval.sample_sizes.contains(&0) {
            return Err(Error::Config("eval trials, samples and sample sizes must be positive".into()));
        }
        if self.baseline.steps == 0 || self.baseline.train_draws == 0 || self.baseline.n == 0 {
            return Err(Error::Config("baseline steps, train_draws and n must be positive".into()));
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("sed = 3").is_err());
        assert!(RunConfig::from_toml("[train]\nbatchsize = 3").is_err());
        assert!(RunConfig::from_toml("[family]\nfamily = \"gmm\"\ndim = 1\nfoo = 1").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let text = r#"
seed = 7
[family]
family = "gmm"
dim = 2
[sampler]
steps = 15
block_size = 5
[train]
rule = "full"
inner_steps = 5
optimizer = { kind = "adam", beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8 }
[eval]
schedule = { a = -2, b = 1 }
specs = ["identity", "square"]
"#;
        let c = RunConfig::from_toml(text).unwrap().resolve().unwrap();
        assert_eq!(c.train.seed, 7);
        assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }

    #[test]
    fn target_and_family_are_exclusive() {
        let text = "[target]\nkind = \"gaussian\"\nmean = [0.0]\nstd = [1.0]\n[family]\nfamily = \"gmm\"\ndim = 1";
        assert!(RunConfig::from_toml(text).unwrap().resolve().is_err());
    }
}
