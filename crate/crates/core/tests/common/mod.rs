#![allow(dead_code)]

use std::sync::Arc;

use amortized_sampler::langevin::{ExecutionTape, LangevinSampler, SeedBundle};
use amortized_sampler::rng::SamplerRng;
use amortized_sampler::targets::{
    BayesLogReg, Dataset, DiagGaussian, GaussBernoulliRbm, GaussianMixture, TargetDensity, TemperedTarget,
};
use amortized_sampler::SamplerModel;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn normal_vec(rng: &mut SamplerRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let diff: Vec<f64> = got.iter().zip(want).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(want).max(1e-300)
}

/// One instance of each concrete target in dimension `d`, with a label.
pub fn all_targets(d: usize, rng: &mut SamplerRng) -> Vec<(&'static str, Arc<dyn TargetDensity>)> {
    let mean = normal_vec(rng, d);
    let var: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
    let gauss = DiagGaussian::new(mean, var).unwrap();
    let means: Vec<Vec<f64>> = (0..3).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let gmm = GaussianMixture::new(means, 0.7).unwrap();
    let hidden = 3;
    let w: Vec<f64> = (0..d * hidden).map(|_| if rng.random::<bool>() { 0.3 } else { -0.3 }).collect();
    let rbm = GaussBernoulliRbm::new(w, normal_vec(rng, d), normal_vec(rng, hidden)).unwrap();
    let n = 20;
    let truth = normal_vec(rng, d);
    let raw = Dataset::synthetic(&truth, n, rng);
    let feats: Vec<f64> = (0..n).flat_map(|i| raw.row(i).iter().map(|x| x * 0.3).collect::<Vec<_>>()).collect();
    let data = Dataset::new(feats, raw.labels().to_vec(), d).unwrap();
    let logreg = BayesLogReg::new(Arc::new(data), 1.0, 5).unwrap();
    let tempered = TemperedTarget::new(gmm.clone(), 0.5).unwrap();
    vec![
        ("gaussian", Arc::new(gauss)),
        ("gmm", Arc::new(gmm)),
        ("rbm", Arc::new(rbm)),
        ("logreg", Arc::new(logreg)),
        ("tempered", Arc::new(tempered)),
    ]
}

/// Block `b` of `s` as a stand-alone sampler started from the tape's block input.
pub fn block_as_sampler(
    s: &LangevinSampler,
    lambda: &[f64],
    tape: &ExecutionTape,
    b: usize,
) -> (LangevinSampler, SeedBundle) {
    let (start, end) = s.block_range(b);
    let d = s.dim();
    let w = if s.scalar_steps() { 1 } else { d };
    let len = end - start;
    let sub = LangevinSampler::with_lambda(
        len,
        d,
        len,
        s.scalar_steps(),
        lambda[start * w..end * w].to_vec(),
        s.init(),
    )
    .unwrap();
    let seed = tape.seed();
    let bundle = SeedBundle {
        z0: tape.state(start).to_vec(),
        xi: seed.xi[start * d..end * d].to_vec(),
        batches: seed.batches[start..end].to_vec(),
    };
    (sub, bundle)
}

/// Central differences of `Σ_i Σ_b ⟨u[i][b], f_b(ξ_i; λ)⟩`, each block run from its frozen
/// recorded input.
pub fn blockwise_surrogate_fd(
    s: &LangevinSampler,
    target: &dyn TargetDensity,
    tapes: &[ExecutionTape],
    upstream: &[Vec<Vec<f64>>],
    step: f64,
) -> Vec<f64> {
    let lambda = s.lambda().to_vec();
    let w = if s.scalar_steps() { 1 } else { s.dim() };
    let mut grad = vec![0.0; lambda.len()];
    for (p, g) in grad.iter_mut().enumerate() {
        let b = (p / w) / s.block_size();
        let eval = |delta: f64| -> f64 {
            let mut l = lambda.clone();
            l[p] += delta;
            tapes
                .iter()
                .zip(upstream)
                .map(|(tape, u)| {
                    let (sub, bundle) = block_as_sampler(s, &l, tape, b);
                    let out = sub.run(target, &bundle).unwrap();
                    dot(&u[b], out.state(sub.steps()))
                })
                .sum()
        };
        *g = (eval(step) - eval(-step)) / (2.0 * step);
    }
    grad
}

/// A Langevin sampler with random log step sizes in `[ln 1e-3, ln 3e-2]`.
pub fn random_sampler(t: usize, d: usize, k: usize, scalar: bool, rng: &mut SamplerRng) -> LangevinSampler {
    let w = if scalar { 1 } else { d };
    let lambda = (0..t * w).map(|_| rng.random_range(1e-3f64.ln()..3e-2f64.ln())).collect();
    LangevinSampler::with_lambda(t, d, k, scalar, lambda, Default::default()).unwrap()
}

pub fn run_all(s: &LangevinSampler, target: &dyn TargetDensity, m: usize, rng: &mut SamplerRng) -> Vec<ExecutionTape> {
    (0..m)
        .map(|_| {
            let seed = s.seed_bundle(target, rng);
            s.run(target, &seed).unwrap()
        })
        .collect()
}

pub fn block_outputs(s: &LangevinSampler, tapes: &[ExecutionTape], b: usize) -> amortized_sampler::ParticleSet {
    let rows: Vec<&[f64]> = tapes.iter().map(|t| s.block_output(t, b)).collect();
    amortized_sampler::ParticleSet::from_rows(&rows).unwrap()
}
