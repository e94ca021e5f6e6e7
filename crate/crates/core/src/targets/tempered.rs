use super::TargetDensity;
use crate::error::{Error, Result};

/// `p(z)^{1/(1+α)}`.
#[derive(Clone, Debug)]
pub struct TemperedTarget<T> {
    inner: T,
    alpha: f64,
}

impl<T: TargetDensity> TemperedTarget<T> {
    pub fn new(inner: T, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be non-negative, got {alpha}")));
        }
        Ok(Self { inner, alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn factor(&self) -> f64 {
        1.0 / (1.0 + self.alpha)
    }
}

impl<T: TargetDensity> TargetDensity for TemperedTarget<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn log_density_unnorm(&self, z: &[f64]) -> f64 {
        self.factor() * self.inner.log_density_unnorm(z)
    }

    fn score(&self, z: &[f64]) -> Vec<f64> {
        let c = 1.0 + self.alpha;
        self.inner.score(z).into_iter().map(|s| s / c).collect()
    }

    fn score_jvp(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let c = 1.0 + self.alpha;
        self.inner.score_jvp(z, v).into_iter().map(|s| s / c).collect()
    }

    fn data_size(&self) -> Option<usize> {
        self.inner.data_size()
    }

    fn minibatch_size(&self) -> Option<usize> {
        self.inner.minibatch_size()
    }

    fn minibatch_score(&self, z: &[f64], batch: &[usize]) -> Vec<f64> {
        let c = 1.0 + self.alpha;
        self.inner.minibatch_score(z, batch).into_iter().map(|s| s / c).collect()
    }

    fn minibatch_score_jvp(&self, z: &[f64], batch: &[usize], v: &[f64]) -> Vec<f64> {
        let c = 1.0 + self.alpha;
        self.inner
            .minibatch_score_jvp(z, batch, v)
            .into_iter()
            .map(|s| s / c)
            .collect()
    }
}
