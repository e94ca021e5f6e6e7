//! Parametric samplers `z = f(ξ; η)` that can be trained by projecting Stein gradients.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::particles::ParticleSet;
use crate::rng::SamplerRng;
use crate::targets::TargetDensity;

/// A differentiable simulator with flat parameter vector `η`.
///
/// Outputs are split into one or more blocks: the Stein gradient of each block's output is
/// pulled back through that block only. Single-block models backpropagate end to end.
pub trait SamplerModel: Send + Sync {
    type Seed: Clone + Send + Sync;
    type Tape: Send + Sync;

    fn dim(&self) -> usize;

    fn params(&self) -> &[f64];

    fn set_params(&mut self, params: &[f64]) -> Result<()>;

    fn draw_seed(&self, target: &dyn TargetDensity, rng: &mut SamplerRng) -> Self::Seed;

    /// Deterministic in `(η, seed)`.
    fn forward(&self, target: &dyn TargetDensity, seed: &Self::Seed) -> Result<Self::Tape>;

    fn num_blocks(&self) -> usize {
        1
    }

    fn block_output<'a>(&self, tape: &'a Self::Tape, block: usize) -> &'a [f64];

    fn output<'a>(&self, tape: &'a Self::Tape) -> &'a [f64] {
        self.block_output(tape, self.num_blocks() - 1)
    }

    /// Adds `J_bᵀ v` to `grad`, where `J_b` is the Jacobian of block `b`'s output with
    /// respect to `η` holding the block's input fixed.
    fn block_vjp(
        &self,
        target: &dyn TargetDensity,
        tape: &Self::Tape,
        block: usize,
        v: &[f64],
        grad: &mut [f64],
    ) -> Result<()>;
}

/// Draws `n` outputs of a model with fresh seeds.
pub fn sample_model<M: SamplerModel + ?Sized>(
    model: &M,
    target: &dyn TargetDensity,
    n: usize,
    rng: &mut SamplerRng,
) -> Result<ParticleSet> {
    let d = model.dim();
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let seed = model.draw_seed(target, rng);
        let tape = model.forward(target, &seed)?;
        data.extend_from_slice(model.output(&tape));
    }
    ParticleSet::new(n, d, data)
}

/// `z = μ + exp(log σ) ⊙ ξ` with `ξ ~ N(0, I)`; parameters are `[μ, log σ]`.
///
/// Its density is tractable, which makes it the reference instrument for checking
/// the amortized updates against closed forms.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSampler {
    params: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct AffineTape {
    xi: Vec<f64>,
    z: Vec<f64>,
}

impl AffineSampler {
    pub fn new(mu: Vec<f64>, log_sigma: Vec<f64>) -> Result<Self> {
        check_dim(mu.len(), log_sigma.len())?;
        if mu.is_empty() {
            return Err(Error::InvalidArgument("affine sampler needs positive dimension".into()));
        }
        let mut params = mu;
        params.extend(log_sigma);
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("affine parameters must be finite".into()));
        }
        Ok(Self { params })
    }

    pub fn mu(&self) -> &[f64] {
        &self.params[..self.dim()]
    }

    pub fn log_sigma(&self) -> &[f64] {
        &self.params[self.dim()..]
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.log_sigma().iter().map(|s| s.exp()).collect()
    }

    /// Output for an explicit noise vector.
    pub fn apply(&self, xi: &[f64]) -> Vec<f64> {
        self.mu()
            .iter()
            .zip(self.log_sigma())
            .zip(xi)
            .map(|((m, ls), e)| m + ls.exp() * e)
            .collect()
    }
}

impl SamplerModel for AffineSampler {
    type Seed = Vec<f64>;
    type Tape = AffineTape;

    fn dim(&self) -> usize {
        self.params.len() / 2
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        check_dim(self.params.len(), params.len())?;
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn draw_seed(&self, _target: &dyn TargetDensity, rng: &mut SamplerRng) -> Vec<f64> {
        (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn forward(&self, target: &dyn TargetDensity, seed: &Vec<f64>) -> Result<AffineTape> {
        check_dim(self.dim(), target.dim())?;
        check_dim(self.dim(), seed.len())?;
        Ok(AffineTape {
            xi: seed.clone(),
            z: self.apply(seed),
        })
    }

    fn block_output<'a>(&self, tape: &'a AffineTape, _block: usize) -> &'a [f64] {
        &tape.z
    }

    fn block_vjp(
        &self,
        _target: &dyn TargetDensity,
        tape: &AffineTape,
        block: usize,
        v: &[f64],
        grad: &mut [f64],
    ) -> Result<()> {
        if block != 0 {
            return Err(Error::InvalidArgument(format!("block {block} out of range")));
        }
        let d = self.dim();
        check_dim(d, v.len())?;
        check_dim(2 * d, grad.len())?;
        for j in 0..d {
            grad[j] += v[j];
            grad[d + j] += v[j] * self.params[d + j].exp() * tape.xi[j];
        }
        Ok(())
    }
}
