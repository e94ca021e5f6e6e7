use super::TargetDensity;
use crate::error::{Error, Result};

/// Gaussian-Bernoulli RBM with hidden units summed out:
/// `log p(z) = bᵀz - ½||z||² + Σ_i log(e^{u_i} + e^{-u_i})`, `u = Bᵀz + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussBernoulliRbm {
    /// `d × ℓ`, row-major.
    weights: Vec<f64>,
    visible_bias: Vec<f64>,
    hidden_bias: Vec<f64>,
}

fn log_2cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p()
}

impl GaussBernoulliRbm {
    pub fn new(weights: Vec<f64>, visible_bias: Vec<f64>, hidden_bias: Vec<f64>) -> Result<Self> {
        let (d, l) = (visible_bias.len(), hidden_bias.len());
        if d == 0 || l == 0 {
            return Err(Error::InvalidArgument("RBM needs at least one visible and one hidden unit".into()));
        }
        if weights.len() != d * l {
            return Err(Error::DimensionMismatch {
                expected: d * l,
                got: weights.len(),
            });
        }
        Ok(Self {
            weights,
            visible_bias,
            hidden_bias,
        })
    }

    pub fn visible(&self) -> usize {
        self.visible_bias.len()
    }

    pub fn hidden(&self) -> usize {
        self.hidden_bias.len()
    }

    pub fn weight(&self, j: usize, i: usize) -> f64 {
        self.weights[j * self.hidden() + i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn visible_bias(&self) -> &[f64] {
        &self.visible_bias
    }

    pub fn hidden_bias(&self) -> &[f64] {
        &self.hidden_bias
    }

    /// `Bᵀz + c`.
    fn hidden_input(&self, z: &[f64]) -> Vec<f64> {
        let l = self.hidden();
        let mut u = self.hidden_bias.clone();
        for (j, zj) in z.iter().enumerate() {
            let row = &self.weights[j * l..(j + 1) * l];
            for (ui, w) in u.iter_mut().zip(row) {
                *ui += w * zj;
            }
        }
        u
    }

    /// `B x` for `x` of length ℓ.
    fn apply_weights(&self, x: &[f64]) -> Vec<f64> {
        let l = self.hidden();
        self.weights
            .chunks_exact(l)
            .map(|row| row.iter().zip(x).map(|(w, a)| w * a).sum())
            .collect()
    }
}

impl TargetDensity for GaussBernoulliRbm {
    fn dim(&self) -> usize {
        self.visible()
    }

    fn log_density_unnorm(&self, z: &[f64]) -> f64 {
        let lin: f64 = z.iter().zip(&self.visible_bias).map(|(a, b)| a * b).sum();
        let quad: f64 = z.iter().map(|a| a * a).sum();
        let hid: f64 = self.hidden_input(z).into_iter().map(log_2cosh).sum();
        lin - 0.5 * quad + hid
    }

    fn score(&self, z: &[f64]) -> Vec<f64> {
        let t: Vec<f64> = self.hidden_input(z).into_iter().map(f64::tanh).collect();
        let bt = self.apply_weights(&t);
        z.iter()
            .zip(&self.visible_bias)
            .zip(bt)
            .map(|((zj, bj), g)| bj - zj + g)
            .collect()
    }

    /// `-v + B diag(1 - tanh²(u)) Bᵀ v`.
    fn score_jvp(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let u = self.hidden_input(z);
        let l = self.hidden();
        let mut btv = vec![0.0; l];
        for (j, vj) in v.iter().enumerate() {
            let row = &self.weights[j * l..(j + 1) * l];
            for (acc, w) in btv.iter_mut().zip(row) {
                *acc += w * vj;
            }
        }
        for (x, ui) in btv.iter_mut().zip(&u) {
            let t = ui.tanh();
            *x *= 1.0 - t * t;
        }
        let back = self.apply_weights(&btv);
        v.iter().zip(back).map(|(a, b)| b - a).collect()
    }
}
