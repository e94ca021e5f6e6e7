//! Kernelized Stein discrepancy with the RBF kernel.
//!
//! `κ_p(z, z') = k · [s·s' + (2/h) r·(s - s') + 2d/h - 4|r|²/h²]` with `r = z - z'`,
//! `s = ∇log p(z)`, `s' = ∇log p(z')`.

use crate::error::{check_dim, Error, Result};
use crate::kernels::{rbf, Bandwidth};
use crate::particles::{dot, sq_dist, ParticleSet};
use crate::svgd::scores_of;
use crate::targets::TargetDensity;

pub use crate::amortize::amortized_ksd_update;

/// U-statistic estimate of the squared KSD. May be negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsdEstimate {
    pub value: f64,
    pub n: usize,
}

fn kappa_from_scores(z: &[f64], z2: &[f64], s: &[f64], s2: &[f64], h: f64) -> f64 {
    let d = z.len() as f64;
    let k = rbf(z, z2, h);
    let r2 = sq_dist(z, z2);
    let cross: f64 = z
        .iter()
        .zip(z2)
        .zip(s.iter().zip(s2))
        .map(|((a, b), (sa, sb))| (a - b) * (sa - sb))
        .sum();
    k * (dot(s, s2) + 2.0 * cross / h + 2.0 * d / h - 4.0 * r2 / (h * h))
}

pub fn kappa_p<T: TargetDensity + ?Sized>(z: &[f64], z2: &[f64], target: &T, h: Bandwidth) -> Result<f64> {
    check_dim(target.dim(), z.len())?;
    check_dim(target.dim(), z2.len())?;
    Ok(kappa_from_scores(z, z2, &target.score(z), &target.score(z2), h.value()))
}

/// `(1/(n(n-1))) Σ_{i≠j} κ_p(z_i, z_j)`.
pub fn ksd_u_statistic<T: TargetDensity + ?Sized>(
    samples: &ParticleSet,
    target: &T,
    h: Bandwidth,
) -> Result<KsdEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let scores = scores_of(samples, target)?;
    let hv = h.value();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in (i + 1)..n {
            row += kappa_from_scores(samples.row(i), samples.row(j), scores.row(i), scores.row(j), hv);
        }
        total += row;
    }
    Ok(KsdEstimate {
        value: 2.0 * total / (n * (n - 1)) as f64,
        n,
    })
}

/// `∇_z κ_p(z, z')`, using the target's Hessian-vector product for the `∇s` terms.
pub fn kappa_grad_first<T: TargetDensity + ?Sized>(
    z: &[f64],
    z2: &[f64],
    target: &T,
    h: Bandwidth,
) -> Result<Vec<f64>> {
    check_dim(target.dim(), z.len())?;
    check_dim(target.dim(), z2.len())?;
    let s = target.score(z);
    let s2 = target.score(z2);
    let hv = h.value();
    let (k, g, mut dir) = pair_terms(z, z2, &s, &s2, hv);
    // ∇_z g = H(z)(s' + 2r/h) + (2/h)(s - s') - 8r/h²
    dir.iter_mut().for_each(|x| *x *= k);
    let hterm = target.score_jvp(z, &dir);
    Ok((0..z.len())
        .map(|l| {
            let r = z[l] - z2[l];
            -2.0 * r * k / hv * g + hterm[l] + k * (2.0 * (s[l] - s2[l]) / hv - 8.0 * r / (hv * hv))
        })
        .collect())
}

/// Returns `(k, g, s' + 2r/h)` where `κ = k·g`.
fn pair_terms(z: &[f64], z2: &[f64], s: &[f64], s2: &[f64], h: f64) -> (f64, f64, Vec<f64>) {
    let d = z.len() as f64;
    let k = rbf(z, z2, h);
    let r2 = sq_dist(z, z2);
    let mut cross = 0.0;
    let mut dir = Vec::with_capacity(z.len());
    for l in 0..z.len() {
        let r = z[l] - z2[l];
        cross += r * (s[l] - s2[l]);
        dir.push(s2[l] + 2.0 * r / h);
    }
    let g = dot(s, s2) + 2.0 * cross / h + 2.0 * d / h - 4.0 * r2 / (h * h);
    (k, g, dir)
}

/// Per-particle descent field `-(2/(n(n-1))) Σ_{j≠i} ∇_{z_i} κ_p(z_i, z_j)`.
///
/// Pulling this back through a sampler's Jacobian gives the gradient step that decreases
/// the U-statistic. The Hessian terms of each row are gathered into one product.
pub fn ksd_descent_field<T: TargetDensity + ?Sized>(
    samples: &ParticleSet,
    target: &T,
    h: Bandwidth,
) -> Result<ParticleSet> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let d = samples.dim();
    let scores = scores_of(samples, target)?;
    let hv = h.value();
    let coef = -2.0 / (n * (n - 1)) as f64;
    let mut out = ParticleSet::zeros(n, d);
    for i in 0..n {
        let (zi, si) = (samples.row(i), scores.row(i));
        let mut direct = vec![0.0; d];
        let mut hdir = vec![0.0; d];
        for j in 0..n {
            if j == i {
                continue;
            }
            let (zj, sj) = (samples.row(j), scores.row(j));
            let (k, g, dir) = pair_terms(zi, zj, si, sj, hv);
            for l in 0..d {
                let r = zi[l] - zj[l];
                direct[l] += -2.0 * r * k / hv * g + k * (2.0 * (si[l] - sj[l]) / hv - 8.0 * r / (hv * hv));
                hdir[l] += k * dir[l];
            }
        }
        let hterm = target.score_jvp(zi, &hdir);
        for (o, (a, b)) in out.row_mut(i).iter_mut().zip(direct.iter().zip(&hterm)) {
            *o = coef * (a + b);
        }
    }
    Ok(out)
}
