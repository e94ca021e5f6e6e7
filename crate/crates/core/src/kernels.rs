//! RBF kernel `k(x, y) = exp(-||x - y||^2 / h)` and the median-heuristic bandwidth.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::particles::{sq_dist, ParticleSet};

/// Squared-distance scale `h` of the RBF kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h.is_finite() {
            Ok(Self(h))
        } else {
            Err(Error::InvalidBandwidth(h))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// How the bandwidth is chosen for a particle set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandwidthRule {
    /// `med^2 / ln n`, recomputed from the particles each time.
    Median,
    Fixed(Bandwidth),
}

impl BandwidthRule {
    pub fn resolve(self, particles: &ParticleSet) -> Bandwidth {
        match self {
            BandwidthRule::Median => median_bandwidth(particles),
            BandwidthRule::Fixed(h) => h,
        }
    }
}

pub fn rbf_eval(x: &[f64], y: &[f64], h: Bandwidth) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    Ok(rbf(x, y, h.0))
}

/// Gradient of `k(x, y)` with respect to `x`.
pub fn rbf_grad_first(x: &[f64], y: &[f64], h: Bandwidth) -> Result<Vec<f64>> {
    check_dim(x.len(), y.len())?;
    let k = rbf(x, y, h.0);
    let c = -2.0 * k / h.0;
    Ok(x.iter().zip(y).map(|(a, b)| c * (a - b)).collect())
}

#[inline]
pub(crate) fn rbf(x: &[f64], y: &[f64], h: f64) -> f64 {
    (-sq_dist(x, y) / h).exp()
}

/// Median heuristic `h = med^2 / ln n` over Euclidean pairwise distances.
///
/// Falls back to `h = 1` when there is at most one particle or the median is zero.
pub fn median_bandwidth(particles: &ParticleSet) -> Bandwidth {
    let n = particles.len();
    if n <= 1 {
        return Bandwidth(1.0);
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let zi = particles.row(i);
        for j in (i + 1)..n {
            dists.push(sq_dist(zi, particles.row(j)).sqrt());
        }
    }
    let med = median_in_place(&mut dists);
    let log_n = (n as f64).ln();
    let h = med * med / log_n;
    if med > 0.0 && log_n > 0.0 && h.is_finite() && h > 0.0 {
        Bandwidth(h)
    } else {
        Bandwidth(1.0)
    }
}

/// Median with the even-count convention of averaging the two central order statistics.
fn median_in_place(xs: &mut [f64]) -> f64 {
    let m = xs.len();
    debug_assert!(m > 0);
    let mid = m / 2;
    let (_, upper, _) = xs.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if m % 2 == 1 {
        upper
    } else {
        let lower = xs[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}
