//! Stein variational gradient and the particle SVGD loop.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kernels::{rbf, Bandwidth, BandwidthRule};
use crate::particles::ParticleSet;
use crate::targets::TargetDensity;

/// Velocity field `φ*(z_i)` evaluated at every particle; same shape as the particles.
#[derive(Clone, Debug, PartialEq)]
pub struct SteinGradient {
    phi: ParticleSet,
}

impl SteinGradient {
    pub fn row(&self, i: usize) -> &[f64] {
        self.phi.row(i)
    }

    pub fn as_particles(&self) -> &ParticleSet {
        &self.phi
    }

    pub fn into_particles(self) -> ParticleSet {
        self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// `φ*(z_i) = (1/n) Σ_j [k(z_j, z_i) s_j + w ∇_{z_j} k(z_j, z_i)]` for precomputed scores
/// `s_j` and repulsion weight `w` (1 for plain SVGD, `1 + α` under entropy regularization).
pub fn stein_gradient_from_scores(
    particles: &ParticleSet,
    scores: &ParticleSet,
    h: Bandwidth,
    repulsion: f64,
) -> Result<SteinGradient> {
    check_dim(particles.len(), scores.len())?;
    check_dim(particles.dim(), scores.dim())?;
    let (n, d) = (particles.len(), particles.dim());
    let hv = h.value();
    let c = -2.0 * repulsion / hv;
    let mut phi = ParticleSet::zeros(n, d);
    for i in 0..n {
        let zi = particles.row(i);
        let out = phi.row_mut(i);
        for j in 0..n {
            let zj = particles.row(j);
            let k = rbf(zj, zi, hv);
            let sj = scores.row(j);
            let ck = c * k;
            for l in 0..d {
                out[l] += k * sj[l] + ck * (zj[l] - zi[l]);
            }
        }
        let inv = n as f64;
        out.iter_mut().for_each(|x| *x /= inv);
    }
    Ok(SteinGradient { phi })
}

pub(crate) fn scores_of<T: TargetDensity + ?Sized>(particles: &ParticleSet, target: &T) -> Result<ParticleSet> {
    check_dim(target.dim(), particles.dim())?;
    let mut s = ParticleSet::zeros(particles.len(), particles.dim());
    for (i, z) in particles.rows().enumerate() {
        s.row_mut(i).copy_from_slice(&target.score(z));
    }
    Ok(s)
}

pub fn stein_gradient<T: TargetDensity + ?Sized>(
    particles: &ParticleSet,
    target: &T,
    rule: BandwidthRule,
) -> Result<SteinGradient> {
    let scores = scores_of(particles, target)?;
    stein_gradient_from_scores(particles, &scores, rule.resolve(particles), 1.0)
}

/// Entropy-regularized Stein gradient: the repulsive term is weighted by `1 + alpha`.
pub fn stein_gradient_entropy<T: TargetDensity + ?Sized>(
    particles: &ParticleSet,
    target: &T,
    rule: BandwidthRule,
    alpha: f64,
) -> Result<SteinGradient> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be non-negative, got {alpha}")));
    }
    let scores = scores_of(particles, target)?;
    stein_gradient_from_scores(particles, &scores, rule.resolve(particles), 1.0 + alpha)
}

/// Step-size scheme for particle SVGD.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StepSchedule {
    Constant { step: f64 },
    /// Per-coordinate scaling by a running average of squared gradients.
    Adagrad { step: f64, momentum: f64, fudge: f64 },
}

impl StepSchedule {
    pub fn constant(step: f64) -> Self {
        StepSchedule::Constant { step }
    }

    pub fn adagrad(step: f64) -> Self {
        StepSchedule::Adagrad {
            step,
            momentum: 0.9,
            fudge: 1e-6,
        }
    }
}

/// Runs `steps` SVGD iterations with the median bandwidth recomputed each step.
pub fn svgd_run<T: TargetDensity + ?Sized>(
    init: &ParticleSet,
    target: &T,
    steps: usize,
    schedule: StepSchedule,
    alpha: f64,
) -> Result<ParticleSet> {
    svgd_run_with(init, target, steps, schedule, alpha, |_, _| Ok(()))
}

/// Like [`svgd_run`], calling `observe(iteration, particles)` after every update.
pub fn svgd_run_with<T, F>(
    init: &ParticleSet,
    target: &T,
    steps: usize,
    schedule: StepSchedule,
    alpha: f64,
    mut observe: F,
) -> Result<ParticleSet>
where
    T: TargetDensity + ?Sized,
    F: FnMut(usize, &ParticleSet) -> Result<()>,
{
    check_dim(target.dim(), init.dim())?;
    let mut z = init.clone();
    let mut hist = vec![0.0; z.as_slice().len()];
    for it in 0..steps {
        let phi = stein_gradient_entropy(&z, target, BandwidthRule::Median, alpha)?;
        let g = phi.as_particles().as_slice();
        match schedule {
            StepSchedule::Constant { step } => {
                for (x, gi) in z.as_mut_slice().iter_mut().zip(g) {
                    *x += step * gi;
                }
            }
            StepSchedule::Adagrad { step, momentum, fudge } => {
                for ((x, gi), hi) in z.as_mut_slice().iter_mut().zip(g).zip(hist.iter_mut()) {
                    *hi = if it == 0 { gi * gi } else { momentum * *hi + (1.0 - momentum) * gi * gi };
                    *x += step * gi / (fudge + hi.sqrt());
                }
            }
        }
        if !z.is_finite() {
            return Err(Error::NonFinite {
                what: "svgd particles",
                iteration: it,
            });
        }
        observe(it, &z)?;
    }
    Ok(z)
}
