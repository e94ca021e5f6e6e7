//! Langevin dynamics unrolled as a `T`-layer stochastic network
//! `z^{t+1} = z^t + η^t ⊙ ∇log p(z^t) + √(2η^t) ⊙ ξ^t`
//! with learnable log step sizes `λ^t = log η^t`.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kernels::BandwidthRule;
use crate::model::SamplerModel;
use crate::rng::SamplerRng;
use crate::targets::{draw_minibatch, score_jvp_on, score_on, TargetDensity};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Distribution of the initial state `z⁰`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitDist {
    StandardNormal,
    Isotropic { mean: f64, std: f64 },
}

impl InitDist {
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Vec<f64> {
        (0..dim)
            .map(|_| {
                let e: f64 = rng.sample(StandardNormal);
                match *self {
                    InitDist::StandardNormal => e,
                    InitDist::Isotropic { mean, std } => mean + std * e,
                }
            })
            .collect()
    }
}

impl Default for InitDist {
    fn default() -> Self {
        InitDist::StandardNormal
    }
}

/// Langevin sampler with `T` steps of per-step step sizes, either one per coordinate
/// (`scalar_steps = false`) or one shared by all coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LangevinSampler {
    steps: usize,
    dim: usize,
    block_size: usize,
    scalar_steps: bool,
    lambda: Vec<f64>,
    init: InitDist,
}

/// Random inputs of one forward pass: `z⁰`, the per-step noises and, for subsampled
/// targets, the per-step minibatch indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedBundle {
    pub z0: Vec<f64>,
    /// `T × d`, row-major.
    pub xi: Vec<f64>,
    pub batches: Vec<Option<Vec<usize>>>,
}

/// Everything a forward pass computed, enough to backpropagate any block.
#[derive(Clone, Debug, PartialEq)]
pub struct ExecutionTape {
    /// `(T + 1) × d` states `z⁰ … z^T`.
    states: Vec<f64>,
    /// `T × d` scores at `z⁰ … z^{T-1}`.
    scores: Vec<f64>,
    seed: SeedBundle,
    dim: usize,
}

impl ExecutionTape {
    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t * self.dim..(t + 1) * self.dim]
    }

    pub fn score(&self, t: usize) -> &[f64] {
        &self.scores[t * self.dim..(t + 1) * self.dim]
    }

    pub fn seed(&self) -> &SeedBundle {
        &self.seed
    }

    pub fn steps(&self) -> usize {
        self.scores.len() / self.dim
    }
}

impl LangevinSampler {
    pub const DEFAULT_LOG_STEP: f64 = -6.907_755_278_982_137; // ln(1e-3)

    pub fn new(steps: usize, dim: usize, block_size: usize, scalar_steps: bool, init_log_step: f64) -> Result<Self> {
        let width = if scalar_steps { 1 } else { dim };
        Self::with_lambda(steps, dim, block_size, scalar_steps, vec![init_log_step; steps * width], InitDist::default())
    }

    pub fn with_lambda(
        steps: usize,
        dim: usize,
        block_size: usize,
        scalar_steps: bool,
        lambda: Vec<f64>,
        init: InitDist,
    ) -> Result<Self> {
        if steps == 0 || dim == 0 {
            return Err(Error::InvalidArgument("Langevin sampler needs T ≥ 1 and d ≥ 1".into()));
        }
        if block_size == 0 || block_size > steps {
            return Err(Error::InvalidArgument(format!(
                "block size must be in 1..={steps}, got {block_size}"
            )));
        }
        let width = if scalar_steps { 1 } else { dim };
        check_dim(steps * width, lambda.len())?;
        let s = Self {
            steps,
            dim,
            block_size,
            scalar_steps,
            lambda,
            init,
        };
        s.check_lambda()?;
        if let InitDist::Isotropic { std, mean } = init {
            if !(std >= 0.0 && std.is_finite() && mean.is_finite()) {
                return Err(Error::InvalidArgument("initial distribution must have finite mean and std ≥ 0".into()));
            }
        }
        Ok(s)
    }

    /// Fixed schedule with one scalar step size per step.
    pub fn from_schedule(dim: usize, step_sizes: &[f64], block_size: usize) -> Result<Self> {
        if step_sizes.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidArgument("step sizes must be positive".into()));
        }
        let lambda = step_sizes.iter().map(|e| e.ln()).collect();
        Self::with_lambda(step_sizes.len(), dim, block_size.min(step_sizes.len()).max(1), true, lambda, InitDist::default())
    }

    fn check_lambda(&self) -> Result<()> {
        if self.lambda.iter().all(|l| l.exp().is_finite() && l.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("log step sizes must give finite positive steps".into()))
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn scalar_steps(&self) -> bool {
        self.scalar_steps
    }

    pub fn init(&self) -> InitDist {
        self.init
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    fn width(&self) -> usize {
        if self.scalar_steps {
            1
        } else {
            self.dim
        }
    }

    /// `η^t` broadcast to `d` coordinates.
    pub fn step_sizes(&self, t: usize) -> Vec<f64> {
        let w = self.width();
        let row = &self.lambda[t * w..(t + 1) * w];
        (0..self.dim).map(|j| row[if w == 1 { 0 } else { j }].exp()).collect()
    }

    /// Layer range `[start, end)` of block `b`; the last block takes the remainder.
    pub fn block_range(&self, b: usize) -> (usize, usize) {
        let start = b * self.block_size;
        (start, (start + self.block_size).min(self.steps))
    }

    pub fn seed_bundle(&self, target: &dyn TargetDensity, rng: &mut SamplerRng) -> SeedBundle {
        let d = self.dim;
        let z0 = self.init.sample(d, rng);
        let xi = (0..self.steps * d).map(|_| rng.sample(StandardNormal)).collect();
        let batches = (0..self.steps).map(|_| draw_minibatch(target, rng)).collect();
        SeedBundle { z0, xi, batches }
    }

    fn check_seed(&self, seed: &SeedBundle) -> Result<()> {
        check_dim(self.dim, seed.z0.len())?;
        check_dim(self.steps * self.dim, seed.xi.len())?;
        check_dim(self.steps, seed.batches.len())
    }

    /// Runs all `T` layers, recording every intermediate state and score.
    pub fn run(&self, target: &dyn TargetDensity, seed: &SeedBundle) -> Result<ExecutionTape> {
        check_dim(self.dim, target.dim())?;
        self.check_seed(seed)?;
        let d = self.dim;
        let mut states = Vec::with_capacity((self.steps + 1) * d);
        let mut scores = Vec::with_capacity(self.steps * d);
        states.extend_from_slice(&seed.z0);
        for t in 0..self.steps {
            let z = &states[t * d..(t + 1) * d];
            let s = score_on(target, z, seed.batches[t].as_deref());
            let eta = self.step_sizes(t);
            let xi = &seed.xi[t * d..(t + 1) * d];
            let next: Vec<f64> = (0..d)
                .map(|j| z[j] + eta[j] * s[j] + (2.0 * eta[j]).sqrt() * xi[j])
                .collect();
            if next.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    what: "langevin state",
                    iteration: t,
                });
            }
            scores.extend_from_slice(&s);
            states.extend_from_slice(&next);
        }
        Ok(ExecutionTape {
            states,
            scores,
            seed: seed.clone(),
            dim: d,
        })
    }

    /// Gradient of `⟨upstream, z^{end_b}⟩` with respect to the `λ` rows of block `b`,
    /// holding the block input `z^{start_b}` fixed. Returned as a full-length parameter
    /// vector that is zero outside the block.
    pub fn backprop(
        &self,
        target: &dyn TargetDensity,
        tape: &ExecutionTape,
        upstream: &[f64],
        block: usize,
    ) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.lambda.len()];
        self.backprop_into(target, tape, upstream, block, &mut grad)?;
        Ok(grad)
    }

    fn backprop_into(
        &self,
        target: &dyn TargetDensity,
        tape: &ExecutionTape,
        upstream: &[f64],
        block: usize,
        grad: &mut [f64],
    ) -> Result<()> {
        if block >= self.num_blocks() {
            return Err(Error::InvalidArgument(format!(
                "block {block} out of range (model has {})",
                self.num_blocks()
            )));
        }
        check_dim(self.dim, upstream.len())?;
        check_dim(self.lambda.len(), grad.len())?;
        if tape.steps() != self.steps {
            return Err(Error::DimensionMismatch {
                expected: self.steps,
                got: tape.steps(),
            });
        }
        let d = self.dim;
        let w = self.width();
        let (start, end) = self.block_range(block);
        let mut adj = upstream.to_vec();
        for t in (start..end).rev() {
            let eta = self.step_sizes(t);
            let s = tape.score(t);
            let xi = &tape.seed.xi[t * d..(t + 1) * d];
            for j in 0..d {
                let dz_dlambda = eta[j] * s[j] + 0.5 * (2.0 * eta[j]).sqrt() * xi[j];
                grad[t * w + if w == 1 { 0 } else { j }] += dz_dlambda * adj[j];
            }
            if t > start {
                // a ← (I + diag(η) H)ᵀ a = a + H (η ⊙ a), H symmetric
                let scaled: Vec<f64> = adj.iter().zip(&eta).map(|(a, e)| a * e).collect();
                let hv = score_jvp_on(target, tape.state(t), tape.seed.batches[t].as_deref(), &scaled);
                for (a, h) in adj.iter_mut().zip(hv) {
                    *a += h;
                }
            }
        }
        Ok(())
    }

    /// Blockwise amortized-SVGD gradient over `λ`: for each block, the Stein gradient of
    /// the batch's block outputs is pulled back through that block, summed over seeds.
    pub fn param_grad(
        &self,
        target: &dyn TargetDensity,
        seeds: &[SeedBundle],
        alpha: f64,
        rule: BandwidthRule,
    ) -> Result<Vec<f64>> {
        let tapes = crate::amortize::forward_batch(self, target, seeds)?;
        crate::amortize::stein_param_grad(self, target, &tapes, alpha, rule)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            steps: self.steps,
            dim: self.dim,
            block_size: self.block_size,
            scalar_steps: self.scalar_steps,
            lambda: self.lambda.clone(),
            init: self.init,
        }
    }

    pub fn from_checkpoint(c: &Checkpoint) -> Result<Self> {
        if c.format_version != CHECKPOINT_VERSION {
            return Err(Error::UnsupportedVersion(c.format_version));
        }
        Self::with_lambda(c.steps, c.dim, c.block_size, c.scalar_steps, c.lambda.clone(), c.init)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&self.to_checkpoint())?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::file(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let c: Checkpoint = serde_json::from_str(&text)?;
        Self::from_checkpoint(&c)
    }
}

/// Serialized sampler. Floats are written in shortest round-trip form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub steps: usize,
    pub dim: usize,
    pub block_size: usize,
    pub scalar_steps: bool,
    pub lambda: Vec<f64>,
    pub init: InitDist,
}

impl SamplerModel for LangevinSampler {
    type Seed = SeedBundle;
    type Tape = ExecutionTape;

    fn dim(&self) -> usize {
        self.dim
    }

    fn params(&self) -> &[f64] {
        &self.lambda
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        check_dim(self.lambda.len(), params.len())?;
        let old = std::mem::replace(&mut self.lambda, params.to_vec());
        if let Err(e) = self.check_lambda() {
            self.lambda = old;
            return Err(e);
        }
        Ok(())
    }

    fn draw_seed(&self, target: &dyn TargetDensity, rng: &mut SamplerRng) -> SeedBundle {
        self.seed_bundle(target, rng)
    }

    fn forward(&self, target: &dyn TargetDensity, seed: &SeedBundle) -> Result<ExecutionTape> {
        self.run(target, seed)
    }

    fn num_blocks(&self) -> usize {
        self.steps.div_ceil(self.block_size)
    }

    fn block_output<'a>(&self, tape: &'a ExecutionTape, block: usize) -> &'a [f64] {
        tape.state(self.block_range(block).1)
    }

    fn block_vjp(
        &self,
        target: &dyn TargetDensity,
        tape: &ExecutionTape,
        block: usize,
        v: &[f64],
        grad: &mut [f64],
    ) -> Result<()> {
        self.backprop_into(target, tape, v, block, grad)
    }
}
