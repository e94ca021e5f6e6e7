use rand::Rng;
use rand_distr::StandardNormal;

use super::TargetDensity;
use crate::error::{Error, Result};
use crate::particles::ParticleSet;

/// Gaussian with diagonal covariance; the reference target for calibration tests.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagGaussian {
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl DiagGaussian {
    pub fn new(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        if mean.is_empty() || mean.len() != var.len() {
            return Err(Error::InvalidArgument("mean and variance must be non-empty and equal length".into()));
        }
        if var.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("variances must be positive".into()));
        }
        Ok(Self { mean, var })
    }

    pub fn isotropic(mean: Vec<f64>, var: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, vec![var; d])
    }

    pub fn standard(d: usize) -> Self {
        Self {
            mean: vec![0.0; d],
            var: vec![1.0; d],
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    /// Exact i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> ParticleSet {
        let d = self.mean.len();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            for j in 0..d {
                let e: f64 = rng.sample(StandardNormal);
                data.push(self.mean[j] + self.var[j].sqrt() * e);
            }
        }
        ParticleSet::new(n, d, data).expect("shape is consistent")
    }
}

impl TargetDensity for DiagGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density_unnorm(&self, z: &[f64]) -> f64 {
        -0.5 * z
            .iter()
            .zip(&self.mean)
            .zip(&self.var)
            .map(|((x, m), v)| (x - m) * (x - m) / v)
            .sum::<f64>()
    }

    fn score(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.mean)
            .zip(&self.var)
            .map(|((x, m), v)| (m - x) / v)
            .collect()
    }

    fn score_jvp(&self, _z: &[f64], v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.var).map(|(a, s)| -a / s).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::testing::check_target;
    use super::*;

    #[test]
    fn derivatives_are_consistent() {
        let g = DiagGaussian::new(vec![1.0, -2.0, 0.5], vec![0.5, 2.0, 1.5]).unwrap();
        let mut rng = crate::rng::seeded(3);
        let pts: Vec<Vec<f64>> = (0..50).map(|_| g.sample(1, &mut rng).into_vec()).collect();
        let dirs: Vec<_> = (0..50)
            .map(|_| (g.sample(1, &mut rng).into_vec(), g.sample(1, &mut rng).into_vec()))
            .collect();
        check_target(&g, &pts, &dirs);
    }

    #[test]
    fn rejects_bad_variance() {
        assert!(DiagGaussian::new(vec![0.0], vec![0.0]).is_err());
        assert!(DiagGaussian::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }
}
