//! Target densities known up to normalization through their log-density and score.

mod family;
mod gaussian;
mod gmm;
mod logreg;
mod rbm;
mod tempered;

pub use family::{Family, FamilyMember, FamilySpec, LogRegFamily};
pub use gaussian::DiagGaussian;
pub use gmm::GaussianMixture;
pub use logreg::{sigmoid, BayesLogReg, Dataset};
pub use rbm::GaussBernoulliRbm;
pub use tempered::TemperedTarget;

use rand::seq::index::sample;
use rand::Rng;

/// Relative step of the finite-difference Hessian-vector fallback.
pub const DEFAULT_JVP_STEP: f64 = 1e-5;

/// An unnormalized density `p(z)` on `R^d`.
///
/// Implementors must provide the log-density and score; the Hessian-vector product of
/// `log p` falls back to central differences of the score. Targets built from data may
/// additionally expose minibatch estimates of the score and its Jacobian.
pub trait TargetDensity: Send + Sync {
    fn dim(&self) -> usize;

    fn log_density_unnorm(&self, z: &[f64]) -> f64;

    /// `∇_z log p(z)`.
    fn score(&self, z: &[f64]) -> Vec<f64>;

    /// `∇²_z log p(z) · v`.
    fn score_jvp(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        fd_score_jvp(|x| self.score(x), z, v, DEFAULT_JVP_STEP)
    }

    /// Number of data points behind a stochastic score, if any.
    fn data_size(&self) -> Option<usize> {
        None
    }

    /// Minibatch size used by stochastic-gradient samplers, if the target supports one.
    fn minibatch_size(&self) -> Option<usize> {
        None
    }

    /// Unbiased score estimate from the data points in `batch`.
    fn minibatch_score(&self, z: &[f64], _batch: &[usize]) -> Vec<f64> {
        self.score(z)
    }

    fn minibatch_score_jvp(&self, z: &[f64], _batch: &[usize], v: &[f64]) -> Vec<f64> {
        self.score_jvp(z, v)
    }
}

impl<T: TargetDensity + ?Sized> TargetDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density_unnorm(&self, z: &[f64]) -> f64 {
        (**self).log_density_unnorm(z)
    }
    fn score(&self, z: &[f64]) -> Vec<f64> {
        (**self).score(z)
    }
    fn score_jvp(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        (**self).score_jvp(z, v)
    }
    fn data_size(&self) -> Option<usize> {
        (**self).data_size()
    }
    fn minibatch_size(&self) -> Option<usize> {
        (**self).minibatch_size()
    }
    fn minibatch_score(&self, z: &[f64], batch: &[usize]) -> Vec<f64> {
        (**self).minibatch_score(z, batch)
    }
    fn minibatch_score_jvp(&self, z: &[f64], batch: &[usize], v: &[f64]) -> Vec<f64> {
        (**self).minibatch_score_jvp(z, batch, v)
    }
}

/// Draws a minibatch of indices without replacement when the target is subsampled.
///
/// Returns `None` for exact targets or when the minibatch covers the whole dataset.
pub fn draw_minibatch<T: TargetDensity + ?Sized, R: Rng + ?Sized>(
    target: &T,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let n = target.data_size()?;
    let m = target.minibatch_size()?;
    if m >= n {
        return None;
    }
    let mut idx = sample(rng, n, m).into_vec();
    idx.sort_unstable();
    Some(idx)
}

/// Score evaluated on an optional minibatch.
pub fn score_on<T: TargetDensity + ?Sized>(target: &T, z: &[f64], batch: Option<&[usize]>) -> Vec<f64> {
    match batch {
        Some(b) => target.minibatch_score(z, b),
        None => target.score(z),
    }
}

pub fn score_jvp_on<T: TargetDensity + ?Sized>(
    target: &T,
    z: &[f64],
    batch: Option<&[usize]>,
    v: &[f64],
) -> Vec<f64> {
    match batch {
        Some(b) => target.minibatch_score_jvp(z, b, v),
        None => target.score_jvp(z, v),
    }
}

/// Central difference of `score` along `v`, with step `rel_step * (1 + ||z||_inf)`.
///
/// The direction is normalized before differencing so the result is exactly linear in
/// the scale of `v`.
pub fn fd_score_jvp<F>(score: F, z: &[f64], v: &[f64], rel_step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return vec![0.0; z.len()];
    }
    let zmax = z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let eps = rel_step * (1.0 + zmax);
    let plus: Vec<f64> = z.iter().zip(v).map(|(a, b)| a + eps * b / scale).collect();
    let minus: Vec<f64> = z.iter().zip(v).map(|(a, b)| a - eps * b / scale).collect();
    let sp = score(&plus);
    let sm = score(&minus);
    sp.iter()
        .zip(&sm)
        .map(|(a, b)| (a - b) / (2.0 * eps) * scale)
        .collect()
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Normalized weights `softmax(xs)`.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(xs);
    xs.iter().map(|x| (x - lse).exp()).collect()
}
