use rand::Rng;
use rand_distr::StandardNormal;

use super::{log_sum_exp, softmax, TargetDensity};
use crate::error::{Error, Result};
use crate::particles::{dot, sq_dist, ParticleSet};

/// Equal-weight mixture of `K` isotropic Gaussians sharing the standard deviation `sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMixture {
    means: Vec<Vec<f64>>,
    sigma: f64,
}

impl GaussianMixture {
    pub fn new(means: Vec<Vec<f64>>, sigma: f64) -> Result<Self> {
        let d = means
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("mixture needs at least one component".into()))?;
        if d == 0 || means.iter().any(|m| m.len() != d) {
            return Err(Error::InvalidArgument("component means must share a positive dimension".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { means, sigma })
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn components(&self) -> usize {
        self.means.len()
    }

    fn log_component_terms(&self, z: &[f64]) -> Vec<f64> {
        let s2 = self.sigma * self.sigma;
        self.means.iter().map(|m| -sq_dist(z, m) / (2.0 * s2)).collect()
    }

    /// Exact i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> ParticleSet {
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            let k = rng.random_range(0..self.means.len());
            for j in 0..d {
                let e: f64 = rng.sample(StandardNormal);
                data.push(self.means[k][j] + self.sigma * e);
            }
        }
        ParticleSet::new(n, d, data).expect("shape is consistent")
    }
}

impl TargetDensity for GaussianMixture {
    fn dim(&self) -> usize {
        self.means[0].len()
    }

    fn log_density_unnorm(&self, z: &[f64]) -> f64 {
        log_sum_exp(&self.log_component_terms(z))
    }

    fn score(&self, z: &[f64]) -> Vec<f64> {
        let w = softmax(&self.log_component_terms(z));
        let s2 = self.sigma * self.sigma;
        let mut out = vec![0.0; z.len()];
        for (wk, m) in w.iter().zip(&self.means) {
            for j in 0..z.len() {
                out[j] += wk * (m[j] - z[j]);
            }
        }
        out.iter_mut().for_each(|x| *x /= s2);
        out
    }

    /// `-v/σ² + (Σ_k w_k m_k m_kᵀ - m̄ m̄ᵀ) v / σ⁴` with `m_k = ϑ_k - z`.
    fn score_jvp(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let w = softmax(&self.log_component_terms(z));
        let s2 = self.sigma * self.sigma;
        let d = z.len();
        let mut mbar = vec![0.0; d];
        let mut second = vec![0.0; d];
        let mut diff = vec![0.0; d];
        for (wk, m) in w.iter().zip(&self.means) {
            for j in 0..d {
                diff[j] = m[j] - z[j];
            }
            let proj = dot(&diff, v);
            for j in 0..d {
                mbar[j] += wk * diff[j];
                second[j] += wk * diff[j] * proj;
            }
        }
        let mproj = dot(&mbar, v);
        (0..d)
            .map(|j| -v[j] / s2 + (second[j] - mbar[j] * mproj) / (s2 * s2))
            .collect()
    }
}
