//! Training samplers by projecting Stein variational gradients onto their parameters.
//!
//! Every update draws a batch of seeds, pushes them through the sampler, computes the
//! Stein gradient `φ*` at each block output and moves the parameters so that outputs
//! follow `φ*`. Four projection rules are available:
//!
//! * `Chain`: `η ← η + (ε/m) Σ_i ∂_η f(ξ_i)ᵀ φ*(z_i)`.
//! * `Full`: freeze `z'_i = z_i + ε φ*(z_i)` and take `L` gradient steps on
//!   `(1/m) Σ_i ||f(ξ_i; η) - z'_i||²`.
//! * `Linearized`: ridge least squares `min_δ Σ_i ||J_i δ - φ*(z_i)||² + ρ||δ||²`,
//!   then `η ← η + ε δ`.
//! * `Aksd`: gradient descent on the U-statistic KSD of the outputs.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{median_bandwidth, BandwidthRule};
use crate::ksd::{ksd_descent_field, ksd_u_statistic};
use crate::model::SamplerModel;
use crate::particles::ParticleSet;
use crate::rng::{derived, SamplerRng};
use crate::svgd::{scores_of, stein_gradient_from_scores};
use crate::targets::{Family, FamilyMember, TargetDensity};

const TAG_TRAIN: u64 = 0x7472_6169_6e00;
const TAG_EVAL: u64 = 0x6576_616c_0000;

pub fn draw_seeds<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    m: usize,
    rng: &mut SamplerRng,
) -> Vec<M::Seed> {
    (0..m).map(|_| model.draw_seed(target, rng)).collect()
}

/// Forward pass of every seed, in seed order.
pub fn forward_batch<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    seeds: &[M::Seed],
) -> Result<Vec<M::Tape>> {
    seeds.par_iter().map(|s| model.forward(target, s)).collect()
}

fn block_outputs<M: SamplerModel + ?Sized>(model: &M, tapes: &[M::Tape], block: usize) -> Result<ParticleSet> {
    let rows: Vec<&[f64]> = tapes.iter().map(|t| model.block_output(t, block)).collect();
    ParticleSet::from_rows(&rows)
}

/// `Σ_i J_{b,i}ᵀ v_i` for one block, reduced in seed order.
fn pull_back<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    tapes: &[M::Tape],
    block: usize,
    field: &ParticleSet,
    grad: &mut [f64],
) -> Result<()> {
    let p = grad.len();
    let parts: Vec<Vec<f64>> = tapes
        .par_iter()
        .enumerate()
        .map(|(i, tape)| {
            let mut g = vec![0.0; p];
            model.block_vjp(target, tape, block, field.row(i), &mut g)?;
            Ok(g)
        })
        .collect::<Result<_>>()?;
    for g in parts {
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    Ok(())
}

fn stein_field(outputs: &ParticleSet, target: &dyn TargetDensity, alpha: f64, rule: BandwidthRule) -> Result<ParticleSet> {
    let scores = scores_of(outputs, target)?;
    let h = rule.resolve(outputs);
    Ok(stein_gradient_from_scores(outputs, &scores, h, 1.0 + alpha)?.into_particles())
}

/// Blockwise sum over the batch of `J_bᵀ φ*_b(z_b)`, with `φ*` entropy-regularized when
/// `alpha > 0`. The Stein gradient is treated as a constant.
pub fn stein_param_grad<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    tapes: &[M::Tape],
    alpha: f64,
    rule: BandwidthRule,
) -> Result<Vec<f64>> {
    if tapes.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be non-negative, got {alpha}")));
    }
    let mut grad = vec![0.0; model.params().len()];
    for b in 0..model.num_blocks() {
        let outputs = block_outputs(model, tapes, b)?;
        let phi = stein_field(&outputs, target, alpha, rule)?;
        pull_back(model, target, tapes, b, &phi, &mut grad)?;
    }
    Ok(grad)
}

fn chain_direction<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    seeds: &[M::Seed],
    alpha: f64,
) -> Result<Vec<f64>> {
    let tapes = forward_batch(model, target, seeds)?;
    let m = seeds.len() as f64;
    let mut g = stein_param_grad(model, target, &tapes, alpha, BandwidthRule::Median)?;
    g.iter_mut().for_each(|x| *x /= m);
    Ok(g)
}

fn add_scaled(params: &[f64], dir: &[f64], eps: f64) -> Vec<f64> {
    params.iter().zip(dir).map(|(p, d)| p + eps * d).collect()
}

/// One chain-rule step.
pub fn update_chain<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    seeds: &[M::Seed],
    eps: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    let dir = chain_direction(model, target, seeds, alpha)?;
    Ok(add_scaled(model.params(), &dir, eps))
}

/// Projection by `inner_steps` gradient steps of size `inner_step` toward frozen targets.
pub fn update_full<M: SamplerModel + Clone>(
    model: &M,
    target: &dyn TargetDensity,
    seeds: &[M::Seed],
    eps: f64,
    inner_steps: usize,
    inner_step: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    if inner_steps == 0 {
        return Err(Error::InvalidArgument("inner_steps must be at least 1".into()));
    }
    if seeds.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    let tapes = forward_batch(model, target, seeds)?;
    let blocks = model.num_blocks();
    let mut goals = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let mut out = block_outputs(model, &tapes, b)?;
        let phi = stein_field(&out, target, alpha, BandwidthRule::Median)?;
        for (z, f) in out.as_mut_slice().iter_mut().zip(phi.as_slice()) {
            *z += eps * f;
        }
        goals.push(out);
    }
    let m = seeds.len() as f64;
    let mut work = model.clone();
    let mut tapes = tapes;
    for step in 0..inner_steps {
        if step > 0 {
            tapes = forward_batch(&work, target, seeds)?;
        }
        let mut grad = vec![0.0; work.params().len()];
        for (b, goal) in goals.iter().enumerate() {
            let mut resid = block_outputs(&work, &tapes, b)?;
            for (r, g) in resid.as_mut_slice().iter_mut().zip(goal.as_slice()) {
                *r = 2.0 * (*r - g) / m;
            }
            pull_back(&work, target, &tapes, b, &resid, &mut grad)?;
        }
        let next = add_scaled(work.params(), &grad, -inner_step);
        work.set_params(&next)?;
    }
    Ok(work.params().to_vec())
}

/// Solves the ridge least-squares projection and returns `δ`.
pub fn linearized_direction<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    seeds: &[M::Seed],
    ridge: f64,
    max_params: usize,
    alpha: f64,
) -> Result<Vec<f64>> {
    let p = model.params().len();
    if p > max_params {
        return Err(Error::InvalidArgument(format!(
            "linearized update needs a dense {p}×{p} solve, above the cap of {max_params}"
        )));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidArgument("ridge must be non-negative".into()));
    }
    let tapes = forward_batch(model, target, seeds)?;
    let d = model.dim();
    let mut rows = Vec::new();
    let mut phis = Vec::new();
    for b in 0..model.num_blocks() {
        let outputs = block_outputs(model, &tapes, b)?;
        let phi = stein_field(&outputs, target, alpha, BandwidthRule::Median)?;
        for (i, tape) in tapes.iter().enumerate() {
            let mut unit = vec![0.0; d];
            for l in 0..d {
                unit[l] = 1.0;
                let mut row = vec![0.0; p];
                model.block_vjp(target, tape, b, &unit, &mut row)?;
                unit[l] = 0.0;
                rows.push(row);
                phis.push(phi.row(i)[l]);
            }
        }
    }
    let singular = || Error::InvalidArgument("normal equations are singular; use a positive ridge".into());
    let r = rows.len();
    if r < p {
        // fewer equations than unknowns: δ = Jᵀ (J Jᵀ + ρI)⁻¹ φ, the minimum-norm solution at ρ = 0
        let j = DMatrix::from_fn(r, p, |a, c| rows[a][c]);
        let mut gram = &j * j.transpose();
        for k in 0..r {
            gram[(k, k)] += ridge;
        }
        let y = factor(gram).ok_or_else(singular)?.solve(&DVector::from_vec(phis));
        return Ok((j.transpose() * y).iter().copied().collect());
    }
    let mut normal = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    for (row, phi) in rows.into_iter().zip(phis) {
        let row = DVector::from_vec(row);
        normal.ger(1.0, &row, &row, 1.0);
        rhs.axpy(phi, &row, 1.0);
    }
    for k in 0..p {
        normal[(k, k)] += ridge;
    }
    let chol = factor(normal).ok_or_else(singular)?;
    Ok(chol.solve(&rhs).iter().copied().collect())
}

/// Cholesky factor, treating pivots below 1e-12 of the largest diagonal entry as zero.
fn factor(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let scale = m.diagonal().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let chol = m.cholesky()?;
    let l = chol.l_dirty();
    (0..l.nrows()).all(|k| l[(k, k)] * l[(k, k)] > 1e-12 * scale).then_some(chol)
}

pub fn update_linearized<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    seeds: &[M::Seed],
    eps: f64,
    ridge: f64,
    max_params: usize,
) -> Result<Vec<f64>> {
    let delta = linearized_direction(model, target, seeds, ridge, max_params, 0.0)?;
    Ok(add_scaled(model.params(), &delta, eps))
}

/// Parameter increment `-ε (2/(m(m-1))) Σ_{i≠j} J_iᵀ ∇_{z_i} κ_p(z_i, z_j)`, with the
/// bandwidth fixed at the median of each block's outputs.
pub fn amortized_ksd_update<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    seeds: &[M::Seed],
    eps: f64,
) -> Result<Vec<f64>> {
    let mut g = ksd_direction(model, target, seeds)?;
    g.iter_mut().for_each(|x| *x *= eps);
    Ok(g)
}

fn ksd_direction<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    seeds: &[M::Seed],
) -> Result<Vec<f64>> {
    if seeds.len() < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: seeds.len(),
        });
    }
    let tapes = forward_batch(model, target, seeds)?;
    let mut grad = vec![0.0; model.params().len()];
    for b in 0..model.num_blocks() {
        let outputs = block_outputs(model, &tapes, b)?;
        let h = median_bandwidth(&outputs);
        let field = ksd_descent_field(&outputs, target, h)?;
        pull_back(model, target, &tapes, b, &field, &mut grad)?;
    }
    Ok(grad)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Chain,
    Full,
    Linearized,
    Aksd,
}

impl RuleKind {
    pub fn tag(self) -> &'static str {
        match self {
            RuleKind::Chain => "chain",
            RuleKind::Full => "full",
            RuleKind::Linearized => "linearized",
            RuleKind::Aksd => "aksd",
        }
    }
}

impl std::str::FromStr for RuleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(RuleKind::Chain),
            "full" => Ok(RuleKind::Full),
            "linearized" => Ok(RuleKind::Linearized),
            "aksd" => Ok(RuleKind::Aksd),
            other => Err(Error::Config(format!("unknown update rule {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Sgd
    }
}

/// Settings of one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Seeds per iteration (`m`).
    pub batch: usize,
    /// Outer step size `ε`.
    pub step_size: f64,
    pub rule: RuleKind,
    /// `L` for the full projection.
    pub inner_steps: usize,
    pub inner_step: f64,
    pub ridge: f64,
    pub max_params: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Entropy regularization weight on the repulsive term.
    pub alpha: f64,
    /// Held-out seeds for KSD monitoring; 0 disables monitoring.
    pub eval_batch: usize,
    pub log_every: usize,
    pub optimizer: Optimizer,
    /// Write wall-clock seconds into the metrics; off keeps logs byte-reproducible.
    pub wall_clock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch: 100,
            step_size: 1e-3,
            rule: RuleKind::Chain,
            inner_steps: 1,
            inner_step: 0.5,
            ridge: 1e-6,
            max_params: 2000,
            iterations: 1000,
            seed: 0,
            alpha: 0.0,
            eval_batch: 100,
            log_every: 1,
            optimizer: Optimizer::Sgd,
            wall_clock: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.batch == 0 {
            return bad("batch must be at least 1".into());
        }
        if self.rule == RuleKind::Aksd && self.batch < 2 {
            return bad("the aksd rule needs batch ≥ 2".into());
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad(format!("step_size must be positive, got {}", self.step_size));
        }
        if self.inner_steps == 0 {
            return bad("inner_steps must be at least 1".into());
        }
        if !(self.inner_step > 0.0 && self.inner_step.is_finite()) {
            return bad("inner_step must be positive".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be non-negative".into());
        }
        if self.eval_batch == 1 {
            return bad("eval_batch must be 0 or at least 2".into());
        }
        if self.log_every == 0 {
            return bad("log_every must be at least 1".into());
        }
        Ok(())
    }
}

/// What a run trains against: one fixed target or a family resampled every iteration.
#[derive(Clone, Copy)]
pub enum TrainTarget<'a> {
    Single(&'a dyn TargetDensity),
    Family(&'a Family),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricRecord {
    pub iteration: usize,
    pub rule: &'static str,
    pub ksd_u: f64,
    pub seconds: f64,
    pub theta_hash: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<MetricRecord>,
}

/// Ascent direction for one iteration; the optimizer scales it.
fn direction<M: SamplerModel + Clone>(
    model: &M,
    target: &dyn TargetDensity,
    seeds: &[M::Seed],
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    match cfg.rule {
        RuleKind::Chain => chain_direction(model, target, seeds, cfg.alpha),
        RuleKind::Full => {
            let next = update_full(model, target, seeds, cfg.step_size, cfg.inner_steps, cfg.inner_step, cfg.alpha)?;
            Ok(next
                .iter()
                .zip(model.params())
                .map(|(a, b)| (a - b) / cfg.step_size)
                .collect())
        }
        RuleKind::Linearized => linearized_direction(model, target, seeds, cfg.ridge, cfg.max_params, cfg.alpha),
        RuleKind::Aksd => ksd_direction(model, target, seeds),
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

/// Held-out U-statistic KSD of the sampler's outputs on `target`, using a fixed seed stream.
pub fn heldout_ksd<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    n: usize,
    eval_seed: u64,
) -> Result<f64> {
    let mut rng = derived(eval_seed, TAG_EVAL, 0);
    let seeds = draw_seeds(model, target, n, &mut rng);
    let tapes = forward_batch(model, target, &seeds)?;
    let rows: Vec<&[f64]> = tapes.iter().map(|t| model.output(t)).collect();
    let out = ParticleSet::from_rows(&rows)?;
    Ok(ksd_u_statistic(&out, target, median_bandwidth(&out))?.value)
}

/// Runs the configured number of iterations, updating `model` in place.
pub fn train<M: SamplerModel + Clone>(model: &mut M, target: TrainTarget<'_>, cfg: &TrainConfig) -> Result<TrainLog> {
    cfg.validate()?;
    let clock = Instant::now();
    let mut log = TrainLog::default();
    let mut adam = AdamState {
        m: vec![0.0; model.params().len()],
        v: vec![0.0; model.params().len()],
        t: 0,
    };
    for it in 0..cfg.iterations {
        let wrap = |e: Error| Error::Training {
            iteration: it,
            source: Box::new(e),
        };
        let mut rng = derived(cfg.seed, TAG_TRAIN, it as u64);
        let member: Option<FamilyMember> = match target {
            TrainTarget::Single(_) => None,
            TrainTarget::Family(f) => Some(f.draw(&mut rng)),
        };
        let tgt: &dyn TargetDensity = match (&member, target) {
            (Some(m), _) => m.as_target(),
            (None, TrainTarget::Single(t)) => t,
            (None, TrainTarget::Family(_)) => unreachable!(),
        };
        let seeds = draw_seeds(model, tgt, cfg.batch, &mut rng);
        let dir = direction(model, tgt, &seeds, cfg).map_err(wrap)?;
        let next: Vec<f64> = match cfg.optimizer {
            Optimizer::Sgd => add_scaled(model.params(), &dir, cfg.step_size),
            Optimizer::Adam { beta1, beta2, epsilon } => {
                adam.t += 1;
                let c1 = 1.0 - beta1.powi(adam.t);
                let c2 = 1.0 - beta2.powi(adam.t);
                model
                    .params()
                    .iter()
                    .zip(&dir)
                    .zip(adam.m.iter_mut().zip(adam.v.iter_mut()))
                    .map(|((p, g), (m, v))| {
                        *m = beta1 * *m + (1.0 - beta1) * g;
                        *v = beta2 * *v + (1.0 - beta2) * g * g;
                        p + cfg.step_size * (*m / c1) / ((*v / c2).sqrt() + epsilon)
                    })
                    .collect()
            }
        };
        if next.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                what: "parameters",
                iteration: it,
            });
        }
        model.set_params(&next).map_err(|_| Error::NonFinite {
            what: "parameters",
            iteration: it,
        })?;
        if (it + 1) % cfg.log_every == 0 || it + 1 == cfg.iterations {
            let ksd_u = if cfg.eval_batch >= 2 {
                heldout_ksd(model, tgt, cfg.eval_batch, cfg.seed).map_err(wrap)?
            } else {
                f64::NAN
            };
            log.records.push(MetricRecord {
                iteration: it,
                rule: cfg.rule.tag(),
                ksd_u,
                seconds: if cfg.wall_clock { clock.elapsed().as_secs_f64() } else { 0.0 },
                theta_hash: member.as_ref().map(|m| m.theta_hash()).unwrap_or_else(|| "-".into()),
            });
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AffineSampler;
    use crate::rng::seeded;
    use crate::targets::{DiagGaussian, GaussianMixture};

    #[test]
    fn zero_stein_gradient_leaves_params() {
        // A single seed at the mode of a Gaussian: φ* = score = 0.
        let t = DiagGaussian::isotropic(vec![1.5], 1.0).unwrap();
        let s = AffineSampler::new(vec![1.5], vec![0.0]).unwrap();
        let seeds = vec![vec![0.0]];
        assert_eq!(update_chain(&s, &t, &seeds, 0.1, 0.0).unwrap(), s.params());
        assert_eq!(update_full(&s, &t, &seeds, 0.1, 3, 0.5, 0.0).unwrap(), s.params());
    }

    #[test]
    fn single_seed_chain_is_gradient_ascent_on_log_p() {
        let t = GaussianMixture::new(vec![vec![0.4], vec![-0.3]], 0.5).unwrap();
        let s = AffineSampler::new(vec![0.2], vec![-1.0]).unwrap();
        let xi = vec![0.8];
        let z = s.apply(&xi);
        let sc = t.score(&z)[0];
        let next = update_chain(&s, &t, &[xi.clone()], 0.05, 0.0).unwrap();
        assert!((next[0] - (0.2 + 0.05 * sc)).abs() < 1e-15);
        assert!((next[1] - (-1.0 + 0.05 * sc * (-1.0f64).exp() * 0.8)).abs() < 1e-15);
    }

    #[test]
    fn full_with_one_half_step_equals_chain() {
        let t = GaussianMixture::new(vec![vec![0.4, 0.0], vec![-0.3, 1.0]], 0.7).unwrap();
        let s = AffineSampler::new(vec![0.2, -0.1], vec![-0.5, 0.3]).unwrap();
        let seeds = draw_seeds(&s, &t, 20, &mut seeded(2));
        let a = update_chain(&s, &t, &seeds, 0.03, 0.0).unwrap();
        let b = update_full(&s, &t, &seeds, 0.03, 1, 0.5, 0.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
        assert_eq!(update_full(&s, &t, &seeds, 0.0, 4, 0.5, 0.0).unwrap(), s.params());
    }

    #[test]
    fn zero_iterations_is_noop() {
        let t = DiagGaussian::standard(1);
        let mut s = AffineSampler::new(vec![0.3], vec![0.1]).unwrap();
        let cfg = TrainConfig {
            iterations: 0,
            ..TrainConfig::default()
        };
        let log = train(&mut s, TrainTarget::Single(&t), &cfg).unwrap();
        assert!(log.records.is_empty());
        assert_eq!(s.params(), &[0.3, 0.1]);
    }

    #[test]
    fn training_is_deterministic() {
        let fam = Family::from(crate::targets::FamilySpec::gmm(1));
        let cfg = TrainConfig {
            iterations: 5,
            batch: 10,
            eval_batch: 10,
            seed: 7,
            ..TrainConfig::default()
        };
        let run = || {
            let mut s = crate::langevin::LangevinSampler::new(6, 1, 3, false, -4.0).unwrap();
            let log = train(&mut s, TrainTarget::Family(&fam), &cfg).unwrap();
            (s, log)
        };
        let (a, la) = run();
        let (b, lb) = run();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert_eq!(la.records.len(), 5);
        assert_ne!(la.records[0].theta_hash, la.records[1].theta_hash);
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            TrainConfig { batch: 0, ..ok.clone() },
            TrainConfig { step_size: 0.0, ..ok.clone() },
            TrainConfig { inner_steps: 0, ..ok.clone() },
            TrainConfig { eval_batch: 1, ..ok.clone() },
            TrainConfig { rule: RuleKind::Aksd, batch: 1, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn ksd_update_needs_two_seeds() {
        let t = DiagGaussian::standard(1);
        let s = AffineSampler::new(vec![0.0], vec![0.0]).unwrap();
        assert!(amortized_ksd_update(&s, &t, &[vec![0.1]], 0.1).is_err());
    }

    #[test]
    fn linearized_rejects_oversized_and_singular() {
        let t = DiagGaussian::standard(1);
        let s = AffineSampler::new(vec![0.0], vec![0.0]).unwrap();
        let seeds = vec![vec![0.5], vec![-0.2]];
        assert!(update_linearized(&s, &t, &seeds, 0.1, 1e-6, 1).is_err());
        // repeated seed, two parameters: rank one without ridge
        let twice = vec![vec![0.5], vec![0.5]];
        assert!(update_linearized(&s, &t, &twice, 0.1, 0.0, 10).is_err());
        assert!(update_linearized(&s, &t, &twice, 0.1, 1e-6, 10).is_ok());
    }

    #[test]
    fn orthonormal_rows_give_transpose() {
        // one seed at ξ = 0: J = [1, 0], so δ = Jᵀφ = (score(μ), 0)
        let t = DiagGaussian::standard(1);
        let s = AffineSampler::new(vec![0.8], vec![0.3]).unwrap();
        let delta = linearized_direction(&s, &t, &[vec![0.0]], 0.0, 10, 0.0).unwrap();
        assert!((delta[0] + 0.8).abs() < 1e-15);
        assert_eq!(delta[1], 0.0);
    }
}
