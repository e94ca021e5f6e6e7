use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BayesLogReg, Dataset, GaussBernoulliRbm, GaussianMixture, TargetDensity};
use crate::error::{Error, Result};

/// Parametric family of targets `{p_ϑ}` from which training and evaluation draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilySpec {
    /// Mixture of `components` Gaussians with means drawn from `Uniform(-mean_range, mean_range)`.
    Gmm {
        dim: usize,
        #[serde(default = "defaults::components")]
        components: usize,
        #[serde(default = "defaults::sigma")]
        sigma: f64,
        #[serde(default = "defaults::mean_range")]
        mean_range: f64,
    },
    /// Gaussian-Bernoulli RBM with `b, c ~ N(0, I)` and weights uniform on `{±weight}`.
    Rbm {
        #[serde(default = "defaults::visible")]
        visible: usize,
        #[serde(default = "defaults::hidden")]
        hidden: usize,
        #[serde(default = "defaults::weight")]
        weight: f64,
    },
    /// Synthetic logistic-regression posteriors: `w* ~ N(0, I)`, `x ~ N(0, I)`,
    /// `y ~ Bernoulli(sigmoid(xᵀw*))`.
    Logreg {
        #[serde(default = "defaults::features")]
        features: usize,
        #[serde(default = "defaults::n_train")]
        n_train: usize,
        #[serde(default = "defaults::n_test")]
        n_test: usize,
        #[serde(default = "defaults::prior_precision")]
        prior_precision: f64,
        #[serde(default = "defaults::minibatch")]
        minibatch: usize,
        #[serde(default = "defaults::bias")]
        bias: bool,
    },
}

mod defaults {
    pub fn components() -> usize {
        10
    }
    pub fn sigma() -> f64 {
        0.1
    }
    pub fn mean_range() -> f64 {
        1.0
    }
    pub fn visible() -> usize {
        100
    }
    pub fn hidden() -> usize {
        10
    }
    pub fn weight() -> f64 {
        0.1
    }
    pub fn features() -> usize {
        20
    }
    pub fn n_train() -> usize {
        1000
    }
    pub fn n_test() -> usize {
        1000
    }
    pub fn prior_precision() -> f64 {
        1.0
    }
    pub fn minibatch() -> usize {
        100
    }
    pub fn bias() -> bool {
        true
    }
}

impl FamilySpec {
    pub fn gmm(dim: usize) -> Self {
        FamilySpec::Gmm {
            dim,
            components: defaults::components(),
            sigma: defaults::sigma(),
            mean_range: defaults::mean_range(),
        }
    }

    pub fn rbm(visible: usize, hidden: usize) -> Self {
        FamilySpec::Rbm {
            visible,
            hidden,
            weight: defaults::weight(),
        }
    }

    pub fn logreg(features: usize, n_train: usize) -> Self {
        FamilySpec::Logreg {
            features,
            n_train,
            n_test: defaults::n_test(),
            prior_precision: defaults::prior_precision(),
            minibatch: defaults::minibatch(),
            bias: defaults::bias(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Gmm { .. } => "gmm",
            FamilySpec::Rbm { .. } => "rbm",
            FamilySpec::Logreg { .. } => "logreg",
        }
    }

    /// Dimension of the targets this family produces.
    pub fn dim(&self) -> usize {
        match *self {
            FamilySpec::Gmm { dim, .. } => dim,
            FamilySpec::Rbm { visible, .. } => visible,
            FamilySpec::Logreg { features, bias, .. } => features + usize::from(bias),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match *self {
            FamilySpec::Gmm {
                dim,
                components,
                sigma,
                mean_range,
            } => {
                if dim == 0 || components == 0 {
                    return bad("gmm dim and components must be positive");
                }
                if !(sigma > 0.0 && sigma.is_finite()) || !(mean_range >= 0.0 && mean_range.is_finite()) {
                    return bad("gmm sigma must be positive and mean_range non-negative");
                }
            }
            FamilySpec::Rbm { visible, hidden, weight } => {
                if visible == 0 || hidden == 0 || !weight.is_finite() {
                    return bad("rbm visible/hidden must be positive and weight finite");
                }
            }
            FamilySpec::Logreg {
                features,
                n_train,
                n_test,
                prior_precision,
                minibatch,
                ..
            } => {
                if features == 0 || n_train == 0 || n_test == 0 || minibatch == 0 {
                    return bad("logreg sizes must be positive");
                }
                if !(prior_precision > 0.0 && prior_precision.is_finite()) {
                    return bad("logreg prior_precision must be positive");
                }
            }
        }
        Ok(())
    }
}

/// Logistic-regression posteriors over a fixed pool of (train, test) datasets.
#[derive(Clone, Debug)]
pub struct LogRegFamily {
    pool: Vec<(Arc<Dataset>, Arc<Dataset>)>,
    prior_precision: f64,
    minibatch: usize,
}

impl LogRegFamily {
    pub fn new(pool: Vec<(Dataset, Dataset)>, prior_precision: f64, minibatch: usize) -> Result<Self> {
        let dim = pool
            .first()
            .map(|(tr, _)| tr.dim())
            .ok_or_else(|| Error::InvalidArgument("dataset pool is empty".into()))?;
        if pool.iter().any(|(tr, te)| tr.dim() != dim || te.dim() != dim) {
            return Err(Error::InvalidArgument("datasets in a pool must share a dimension".into()));
        }
        Ok(Self {
            pool: pool.into_iter().map(|(a, b)| (Arc::new(a), Arc::new(b))).collect(),
            prior_precision,
            minibatch,
        })
    }
}

/// A family of targets that can be sampled.
#[derive(Clone, Debug)]
pub enum Family {
    Spec(FamilySpec),
    Pool(LogRegFamily),
}

impl From<FamilySpec> for Family {
    fn from(s: FamilySpec) -> Self {
        Family::Spec(s)
    }
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Spec(s) => s.name(),
            Family::Pool(_) => "logreg",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Family::Spec(s) => s.dim(),
            Family::Pool(p) => p.pool[0].0.dim(),
        }
    }

    /// Draws a fresh family member `p_ϑ`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> FamilyMember {
        match self {
            Family::Spec(spec) => draw_from_spec(spec, rng),
            Family::Pool(p) => {
                let (train, test) = &p.pool[rng.random_range(0..p.pool.len())];
                let target = BayesLogReg::new(train.clone(), p.prior_precision, p.minibatch)
                    .expect("pool datasets are validated on construction");
                FamilyMember::LogReg {
                    target,
                    test: test.clone(),
                }
            }
        }
    }
}

fn draw_from_spec<R: Rng + ?Sized>(spec: &FamilySpec, rng: &mut R) -> FamilyMember {
    match *spec {
        FamilySpec::Gmm {
            dim,
            components,
            sigma,
            mean_range,
        } => {
            let means = (0..components)
                .map(|_| {
                    (0..dim)
                        .map(|_| {
                            if mean_range > 0.0 {
                                rng.random_range(-mean_range..=mean_range)
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            FamilyMember::Gmm(GaussianMixture::new(means, sigma).expect("validated family spec"))
        }
        FamilySpec::Rbm { visible, hidden, weight } => {
            let w = (0..visible * hidden)
                .map(|_| if rng.random::<bool>() { weight } else { -weight })
                .collect();
            let b = (0..visible).map(|_| rng.sample(StandardNormal)).collect();
            let c = (0..hidden).map(|_| rng.sample(StandardNormal)).collect();
            FamilyMember::Rbm(GaussBernoulliRbm::new(w, b, c).expect("validated family spec"))
        }
        FamilySpec::Logreg {
            features,
            n_train,
            n_test,
            prior_precision,
            minibatch,
            bias,
        } => {
            let w: Vec<f64> = (0..features).map(|_| rng.sample(StandardNormal)).collect();
            let mut train = Dataset::synthetic(&w, n_train, rng);
            let mut test = Dataset::synthetic(&w, n_test, rng);
            if bias {
                train = train.with_bias();
                test = test.with_bias();
            }
            let target = BayesLogReg::new(Arc::new(train), prior_precision, minibatch).expect("validated family spec");
            FamilyMember::LogReg {
                target,
                test: Arc::new(test),
            }
        }
    }
}

/// One concrete target drawn from a family.
#[derive(Clone, Debug)]
pub enum FamilyMember {
    Gmm(GaussianMixture),
    Rbm(GaussBernoulliRbm),
    LogReg { target: BayesLogReg, test: Arc<Dataset> },
}

impl FamilyMember {
    pub fn as_target(&self) -> &dyn TargetDensity {
        match self {
            FamilyMember::Gmm(g) => g,
            FamilyMember::Rbm(r) => r,
            FamilyMember::LogReg { target, .. } => target,
        }
    }

    /// Short stable fingerprint of the member's parameters.
    pub fn theta_hash(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |xs: &[f64]| xs.iter().for_each(|x| h.update(x.to_le_bytes()));
        match self {
            FamilyMember::Gmm(g) => {
                put(&[g.sigma()]);
                g.means().iter().for_each(|m| put(m));
            }
            FamilyMember::Rbm(r) => {
                put(r.weights());
                put(r.visible_bias());
                put(r.hidden_bias());
            }
            FamilyMember::LogReg { target, .. } => {
                let d = target.data();
                put(&[target.prior_precision()]);
                (0..d.len()).for_each(|i| put(d.row(i)));
                put(d.labels());
            }
        }
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl TargetDensity for FamilyMember {
    fn dim(&self) -> usize {
        self.as_target().dim()
    }
    fn log_density_unnorm(&self, z: &[f64]) -> f64 {
        self.as_target().log_density_unnorm(z)
    }
    fn score(&self, z: &[f64]) -> Vec<f64> {
        self.as_target().score(z)
    }
    fn score_jvp(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        self.as_target().score_jvp(z, v)
    }
    fn data_size(&self) -> Option<usize> {
        self.as_target().data_size()
    }
    fn minibatch_size(&self) -> Option<usize> {
        self.as_target().minibatch_size()
    }
    fn minibatch_score(&self, z: &[f64], batch: &[usize]) -> Vec<f64> {
        self.as_target().minibatch_score(z, batch)
    }
    fn minibatch_score_jvp(&self, z: &[f64], batch: &[usize], v: &[f64]) -> Vec<f64> {
        self.as_target().minibatch_score_jvp(z, batch, v)
    }
}
