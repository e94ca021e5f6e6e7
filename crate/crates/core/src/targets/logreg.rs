use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::TargetDensity;
use crate::error::{Error, Result};
use crate::particles::dot;

/// Dense binary-classification data with labels in `{0, 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("feature dimension must be positive".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                got: features.len(),
            });
        }
        if labels.iter().any(|y| *y != 0.0 && *y != 1.0) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        Ok(Self { features, labels, dim })
    }

    /// Features `x ~ N(0, I)` and labels `y ~ Bernoulli(sigmoid(xᵀw))`.
    pub fn synthetic<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Self {
        let p = weights.len();
        let mut features = Vec::with_capacity(n * p);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let start = features.len();
            features.extend((0..p).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let prob = sigmoid(dot(&features[start..], weights));
            labels.push(if rng.random::<f64>() < prob { 1.0 } else { 0.0 });
        }
        Self {
            features,
            labels,
            dim: p,
        }
    }

    /// Copy with a constant-one feature appended to every row.
    pub fn with_bias(&self) -> Self {
        let mut features = Vec::with_capacity(self.len() * (self.dim + 1));
        for row in self.features.chunks_exact(self.dim) {
            features.extend_from_slice(row);
            features.push(1.0);
        }
        Self {
            features,
            labels: self.labels.clone(),
            dim: self.dim + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^u)` without overflow.
pub(crate) fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// Posterior over logistic-regression weights under an isotropic Gaussian prior
/// `N(0, α₀⁻¹ I)`. When built with a bias the dataset carries an appended unit feature.
#[derive(Clone, Debug)]
pub struct BayesLogReg {
    data: Arc<Dataset>,
    prior_precision: f64,
    minibatch: usize,
}

impl BayesLogReg {
    pub fn new(data: Arc<Dataset>, prior_precision: f64, minibatch: usize) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::TooFewSamples { need: 1, got: 0 });
        }
        if !(prior_precision > 0.0 && prior_precision.is_finite()) {
            return Err(Error::InvalidArgument("prior precision must be positive".into()));
        }
        if minibatch == 0 {
            return Err(Error::InvalidArgument("minibatch size must be positive".into()));
        }
        Ok(Self {
            data,
            prior_precision,
            minibatch,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn prior_precision(&self) -> f64 {
        self.prior_precision
    }

    /// Score on the data points in `batch`, rescaled by `N/|batch|`; `None` uses every point.
    pub fn score_subset(&self, z: &[f64], batch: Option<&[usize]>) -> Result<Vec<f64>> {
        if let Some(b) = batch {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty minibatch".into()));
            }
            if let Some(&bad) = b.iter().find(|&&i| i >= self.data.len()) {
                return Err(Error::InvalidArgument(format!("minibatch index {bad} out of range")));
            }
        }
        Ok(self.score_unchecked(z, batch))
    }

    fn score_unchecked(&self, z: &[f64], batch: Option<&[usize]>) -> Vec<f64> {
        let mut out: Vec<f64> = z.iter().map(|w| -self.prior_precision * w).collect();
        let mut acc = vec![0.0; z.len()];
        let mut add = |i: usize| {
            let x = self.data.row(i);
            let r = self.data.label(i) - sigmoid(dot(x, z));
            for (a, xj) in acc.iter_mut().zip(x) {
                *a += r * xj;
            }
        };
        let scale = match batch {
            Some(b) => {
                b.iter().for_each(|&i| add(i));
                self.data.len() as f64 / b.len() as f64
            }
            None => {
                (0..self.data.len()).for_each(&mut add);
                1.0
            }
        };
        for (o, a) in out.iter_mut().zip(acc) {
            *o += scale * a;
        }
        out
    }

    fn jvp_unchecked(&self, z: &[f64], batch: Option<&[usize]>, v: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; z.len()];
        let mut add = |i: usize| {
            let x = self.data.row(i);
            let s = sigmoid(dot(x, z));
            let c = s * (1.0 - s) * dot(x, v);
            for (a, xj) in acc.iter_mut().zip(x) {
                *a += c * xj;
            }
        };
        let scale = match batch {
            Some(b) => {
                b.iter().for_each(|&i| add(i));
                self.data.len() as f64 / b.len() as f64
            }
            None => {
                (0..self.data.len()).for_each(&mut add);
                1.0
            }
        };
        v.iter()
            .zip(acc)
            .map(|(vj, a)| -self.prior_precision * vj - scale * a)
            .collect()
    }
}

impl TargetDensity for BayesLogReg {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn log_density_unnorm(&self, z: &[f64]) -> f64 {
        let prior = -0.5 * self.prior_precision * dot(z, z);
        let lik: f64 = (0..self.data.len())
            .map(|i| {
                let u = dot(self.data.row(i), z);
                self.data.label(i) * u - softplus(u)
            })
            .sum();
        prior + lik
    }

    fn score(&self, z: &[f64]) -> Vec<f64> {
        self.score_unchecked(z, None)
    }

    fn score_jvp(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        self.jvp_unchecked(z, None, v)
    }

    fn data_size(&self) -> Option<usize> {
        Some(self.data.len())
    }

    fn minibatch_size(&self) -> Option<usize> {
        Some(self.minibatch)
    }

    fn minibatch_score(&self, z: &[f64], batch: &[usize]) -> Vec<f64> {
        self.score_unchecked(z, Some(batch))
    }

    fn minibatch_score_jvp(&self, z: &[f64], batch: &[usize], v: &[f64]) -> Vec<f64> {
        self.jvp_unchecked(z, Some(batch), v)
    }
}
