//! Amortized Stein variational gradient descent.
//!
//! Trains parametric samplers `z = f(ξ; η)` (chiefly Langevin dynamics with learnable
//! per-step step sizes) so that their outputs follow an unnormalized target density,
//! by projecting the Stein variational gradient onto the sampler's parameters.

pub mod error;
pub mod io;
pub mod kernels;
pub mod particles;
pub mod rng;
pub mod targets;

pub use error::{Error, Result};
pub use kernels::{median_bandwidth, rbf_eval, rbf_grad_first, Bandwidth, BandwidthRule};
pub use particles::ParticleSet;
pub use targets::TargetDensity;
pub mod amortize;
pub mod baselines;
pub mod cli;
pub mod config;
pub mod ksd;
pub mod langevin;
pub mod model;
pub mod svgd;

pub use amortize::{train, RuleKind, TrainConfig, TrainTarget};
pub use langevin::{LangevinSampler, SeedBundle};
pub use model::{AffineSampler, SamplerModel};
