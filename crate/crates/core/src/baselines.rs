//! Power-decay Langevin baselines, exact-moment oracles and the evaluation protocols.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::langevin::{LangevinSampler, SeedBundle};
use crate::model::{sample_model, AffineSampler};
use crate::particles::{dot, ParticleSet};
use crate::rng::{derived, SamplerRng};
use crate::targets::{
    log_sum_exp, softmax, Dataset, Family, FamilyMember, GaussBernoulliRbm, GaussianMixture, TargetDensity,
};

const TAG_TRIAL: u64 = 0x7472_6961_6c00;
const TAG_SAMPLES: u64 = 0x7361_6d70_6c00;
const TAG_GRID: u64 = 0x6772_6964_0000;
const TAG_CLASSIFY: u64 = 0x636c_6173_7300;

/// Largest hidden layer for which RBM moments are enumerated exactly.
pub const RBM_ENUMERATION_CAP: usize = 20;

/// `10^a / (t + b)^γ`.
pub fn power_decay_step(a: i32, b: i32, gamma: f64, t: usize) -> Result<f64> {
    let base = t as f64 + b as f64;
    if base <= 0.0 {
        return Err(Error::InvalidArgument(format!("t + b must be positive (t = {t}, b = {b})")));
    }
    Ok(10f64.powi(a) / base.powf(gamma))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerDecaySchedule {
    pub a: i32,
    pub b: i32,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

pub const DEFAULT_GAMMA: f64 = 0.55;

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

impl PowerDecaySchedule {
    pub fn new(a: i32, b: i32) -> Self {
        Self {
            a,
            b,
            gamma: DEFAULT_GAMMA,
        }
    }

    pub fn steps(&self, t_max: usize) -> Result<Vec<f64>> {
        (0..t_max).map(|t| power_decay_step(self.a, self.b, self.gamma, t)).collect()
    }

    /// A non-adaptive Langevin sampler following this schedule for `t_max` steps.
    pub fn sampler(&self, dim: usize, t_max: usize) -> Result<LangevinSampler> {
        LangevinSampler::from_schedule(dim, &self.steps(t_max)?, t_max)
    }
}

/// The baseline grid `a ∈ {-6, …, 2}`, `b ∈ {0, …, 9}`.
pub fn default_grid() -> Vec<(i32, i32)> {
    (-6..=2).flat_map(|a| (0..=9).map(move |b| (a, b))).collect()
}

/// Which test function `h` an expectation `E_p[h(x^j)]` is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentKind {
    Identity,
    Square,
    Cosine,
}

impl MomentKind {
    pub fn tag(self) -> &'static str {
        match self {
            MomentKind::Identity => "identity",
            MomentKind::Square => "square",
            MomentKind::Cosine => "cosine",
        }
    }
}

/// A test function applied coordinatewise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentSpec {
    Identity,
    Square,
    Cosine { w: f64, b: f64 },
}

impl MomentSpec {
    /// Instantiates `kind`, drawing `w ~ N(0,1)`, `b ~ U(0, 2π)` for the cosine.
    pub fn draw<R: Rng + ?Sized>(kind: MomentKind, rng: &mut R) -> Self {
        match kind {
            MomentKind::Identity => MomentSpec::Identity,
            MomentKind::Square => MomentSpec::Square,
            MomentKind::Cosine => MomentSpec::Cosine {
                w: rng.sample(StandardNormal),
                b: rng.random_range(0.0..2.0 * PI),
            },
        }
    }

    pub fn kind(&self) -> MomentKind {
        match self {
            MomentSpec::Identity => MomentKind::Identity,
            MomentSpec::Square => MomentKind::Square,
            MomentSpec::Cosine { .. } => MomentKind::Cosine,
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            MomentSpec::Identity => x,
            MomentSpec::Square => x * x,
            MomentSpec::Cosine { w, b } => (w * x + b).cos(),
        }
    }

    /// `E[h(x)]` for `x ~ N(mean, var)`.
    fn gaussian_expectation(&self, mean: f64, var: f64) -> f64 {
        match *self {
            MomentSpec::Identity => mean,
            MomentSpec::Square => var + mean * mean,
            MomentSpec::Cosine { w, b } => (-0.5 * w * w * var).exp() * (w * mean + b).cos(),
        }
    }
}

pub fn exact_moments_gmm(gmm: &GaussianMixture, spec: MomentSpec) -> Vec<f64> {
    let k = gmm.components() as f64;
    let var = gmm.sigma() * gmm.sigma();
    let mut out = vec![0.0; gmm.dim()];
    for m in gmm.means() {
        for (o, mj) in out.iter_mut().zip(m) {
            *o += spec.gaussian_expectation(*mj, var) / k;
        }
    }
    out
}

/// Moments of the RBM marginal, an equal-covariance Gaussian mixture over `h ∈ {±1}^ℓ`
/// with components `N(Bh + b, I)` weighted by `exp(cᵀh + ½||Bh + b||²)`.
pub fn exact_moments_rbm(rbm: &GaussBernoulliRbm, spec: MomentSpec) -> Result<Vec<f64>> {
    let (d, l) = (rbm.visible(), rbm.hidden());
    if l > RBM_ENUMERATION_CAP {
        return Err(Error::InvalidArgument(format!(
            "RBM with {l} hidden units exceeds the enumeration cap of {RBM_ENUMERATION_CAP}"
        )));
    }
    let count = 1usize << l;
    let mut means = Vec::with_capacity(count * d);
    let mut logw = Vec::with_capacity(count);
    let mut h = vec![0.0; l];
    for code in 0..count {
        for (i, hi) in h.iter_mut().enumerate() {
            *hi = if code >> i & 1 == 1 { 1.0 } else { -1.0 };
        }
        let start = means.len();
        for j in 0..d {
            let bh: f64 = (0..l).map(|i| rbm.weight(j, i) * h[i]).sum();
            means.push(bh + rbm.visible_bias()[j]);
        }
        let mu = &means[start..];
        logw.push(dot(rbm.hidden_bias(), &h) + 0.5 * dot(mu, mu));
    }
    debug_assert!(log_sum_exp(&logw).is_finite());
    let w = softmax(&logw);
    let mut out = vec![0.0; d];
    for (wk, mu) in w.iter().zip(means.chunks_exact(d)) {
        for (o, m) in out.iter_mut().zip(mu) {
            *o += wk * spec.gaussian_expectation(*m, 1.0);
        }
    }
    Ok(out)
}

pub fn exact_moments(member: &FamilyMember, spec: MomentSpec) -> Result<Vec<f64>> {
    match member {
        FamilyMember::Gmm(g) => Ok(exact_moments_gmm(g, spec)),
        FamilyMember::Rbm(r) => exact_moments_rbm(r, spec),
        FamilyMember::LogReg { .. } => Err(Error::InvalidArgument(
            "logistic-regression posteriors have no closed-form moments".into(),
        )),
    }
}

/// Coordinatewise sample average of `h` over the first `n` rows.
pub fn sample_moments(samples: &ParticleSet, n: usize, spec: MomentSpec) -> Vec<f64> {
    let d = samples.dim();
    let mut out = vec![0.0; d];
    for r in samples.rows().take(n) {
        for (o, x) in out.iter_mut().zip(r) {
            *o += spec.apply(*x);
        }
    }
    let n = n.min(samples.len()).max(1) as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

/// Anything that produces i.i.d. samples for a target.
pub trait Sampler: Sync {
    fn sample(&self, target: &dyn TargetDensity, n: usize, rng: &mut SamplerRng) -> Result<ParticleSet>;
}

impl Sampler for LangevinSampler {
    fn sample(&self, target: &dyn TargetDensity, n: usize, rng: &mut SamplerRng) -> Result<ParticleSet> {
        sample_model(self, target, n, rng)
    }
}

impl Sampler for AffineSampler {
    fn sample(&self, target: &dyn TargetDensity, n: usize, rng: &mut SamplerRng) -> Result<ParticleSet> {
        sample_model(self, target, n, rng)
    }
}

impl<S: Sampler + ?Sized> Sampler for &S {
    fn sample(&self, target: &dyn TargetDensity, n: usize, rng: &mut SamplerRng) -> Result<ParticleSet> {
        (**self).sample(target, n, rng)
    }
}

/// A sampler whose outputs are post-processed by extra Langevin steps.
pub struct Refined<S> {
    inner: S,
    refine: LangevinSampler,
}

impl<S: Sampler> Refined<S> {
    pub fn new(inner: S, schedule: PowerDecaySchedule, steps: usize, dim: usize) -> Result<Self> {
        Ok(Self {
            inner,
            refine: schedule.sampler(dim, steps)?,
        })
    }
}

impl<S: Sampler> Sampler for Refined<S> {
    fn sample(&self, target: &dyn TargetDensity, n: usize, rng: &mut SamplerRng) -> Result<ParticleSet> {
        let mut out = self.inner.sample(target, n, rng)?;
        for i in 0..n {
            let SeedBundle { xi, batches, .. } = self.refine.seed_bundle(target, rng);
            let seed = SeedBundle {
                z0: out.row(i).to_vec(),
                xi,
                batches,
            };
            let tape = self.refine.run(target, &seed)?;
            out.row_mut(i).copy_from_slice(tape.state(self.refine.steps()));
        }
        Ok(out)
    }
}

/// One row of an MSE table.
#[derive(Clone, Debug, PartialEq)]
pub struct MseRecord {
    pub spec: MomentKind,
    pub n: usize,
    pub trial: usize,
    pub value: f64,
}

/// MSE of sample moments on one target, for every `(spec, n)`. Samples for the largest
/// `n` are drawn once and smaller sizes use prefixes.
pub fn mse_on_target<S: Sampler + ?Sized>(
    sampler: &S,
    member: &FamilyMember,
    specs: &[MomentSpec],
    ns: &[usize],
    rng: &mut SamplerRng,
) -> Result<Vec<(MomentKind, usize, f64)>> {
    let n_max = ns.iter().copied().max().unwrap_or(0);
    if n_max == 0 {
        return Err(Error::InvalidArgument("sample sizes must be positive".into()));
    }
    let samples = sampler.sample(member.as_target(), n_max, rng)?;
    let mut out = Vec::with_capacity(specs.len() * ns.len());
    for spec in specs {
        let truth = exact_moments(member, *spec)?;
        for &n in ns {
            out.push((spec.kind(), n, mse(&sample_moments(&samples, n, *spec), &truth)));
        }
    }
    Ok(out)
}

/// Trial `trial` of a paired comparison: the held-out target and cosine parameters depend
/// only on `(root, trial)`, so every sampler sees the same ones.
pub fn trial_setup(family: &Family, kinds: &[MomentKind], root: u64, trial: usize) -> (FamilyMember, Vec<MomentSpec>) {
    let mut rng = derived(root, TAG_TRIAL, trial as u64);
    let member = family.draw(&mut rng);
    let specs = kinds.iter().map(|k| MomentSpec::draw(*k, &mut rng)).collect();
    (member, specs)
}

/// Per-trial MSE over fresh held-out targets, averaged over coordinates.
pub fn mse_table<S: Sampler + ?Sized>(
    sampler: &S,
    family: &Family,
    kinds: &[MomentKind],
    ns: &[usize],
    trials: usize,
    root: u64,
) -> Result<Vec<MseRecord>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let per_trial: Vec<Vec<MseRecord>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (member, specs) = trial_setup(family, kinds, root, trial);
            let mut rng = derived(root, TAG_SAMPLES, trial as u64);
            let rows = mse_on_target(sampler, &member, &specs, ns, &mut rng)?;
            Ok(rows
                .into_iter()
                .map(|(spec, n, value)| MseRecord { spec, n, trial, value })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Mean of the table's values for `(spec, n)` across trials.
pub fn mean_mse(records: &[MseRecord], spec: MomentKind, n: usize) -> f64 {
    let vals: Vec<f64> = records
        .iter()
        .filter(|r| r.spec == spec && r.n == n)
        .map(|r| r.value)
        .collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyResult {
    pub accuracy: f64,
    pub log_likelihood: f64,
}

/// Posterior-predictive accuracy and mean log-likelihood on `test`, averaging
/// `sigmoid(xᵀz_s)` over `n` weight samples.
pub fn classify_dataset<S: Sampler + ?Sized>(
    sampler: &S,
    posterior: &dyn TargetDensity,
    test: &Dataset,
    n: usize,
    rng: &mut SamplerRng,
) -> Result<ClassifyResult> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one posterior sample".into()));
    }
    let weights = sampler.sample(posterior, n, rng)?;
    Ok(predictive_scores(&weights, test))
}

pub(crate) fn predictive_scores(weights: &ParticleSet, test: &Dataset) -> ClassifyResult {
    let mut correct = 0usize;
    let mut loglik = 0.0;
    for i in 0..test.len() {
        let x = test.row(i);
        let p = weights
            .rows()
            .map(|w| crate::targets::sigmoid(dot(x, w)))
            .sum::<f64>()
            / weights.len() as f64;
        let y = test.label(i);
        if (p > 0.5) == (y == 1.0) {
            correct += 1;
        }
        let py = if y == 1.0 { p } else { 1.0 - p };
        loglik += py.max(f64::MIN_POSITIVE).ln();
    }
    ClassifyResult {
        accuracy: correct as f64 / test.len() as f64,
        log_likelihood: loglik / test.len() as f64,
    }
}

/// Classification metrics averaged over logistic-regression family members.
pub fn classify_eval<S: Sampler + ?Sized>(
    sampler: &S,
    members: &[FamilyMember],
    n: usize,
    root: u64,
) -> Result<ClassifyResult> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("no held-out datasets".into()));
    }
    let per: Vec<ClassifyResult> = members
        .par_iter()
        .enumerate()
        .map(|(i, m)| match m {
            FamilyMember::LogReg { target, test } => {
                let mut rng = derived(root, TAG_CLASSIFY, i as u64);
                classify_dataset(sampler, target, test, n, &mut rng)
            }
            _ => Err(Error::InvalidArgument("classification needs logistic-regression targets".into())),
        })
        .collect::<Result<_>>()?;
    let k = per.len() as f64;
    Ok(ClassifyResult {
        accuracy: per.iter().map(|r| r.accuracy).sum::<f64>() / k,
        log_likelihood: per.iter().map(|r| r.log_likelihood).sum::<f64>() / k,
    })
}

/// Per-trial classification on fresh held-out logistic-regression draws.
pub fn classify_table<S: Sampler + ?Sized>(
    sampler: &S,
    family: &Family,
    n: usize,
    trials: usize,
    root: u64,
) -> Result<Vec<ClassifyResult>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (member, _) = trial_setup(family, &[], root, trial);
            let FamilyMember::LogReg { target, test } = &member else {
                return Err(Error::InvalidArgument("classification needs a logistic-regression family".into()));
            };
            let mut rng = derived(root, TAG_CLASSIFY, trial as u64);
            classify_dataset(sampler, target, test, n, &mut rng)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSearchConfig {
    pub gamma: f64,
    /// Family draws used to score each cell.
    pub train_draws: usize,
    /// Samples (parallel chains) per draw.
    pub n: usize,
    pub seed: u64,
}

impl Default for GridSearchConfig {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            train_draws: 10,
            n: 1000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub a: i32,
    pub b: i32,
    /// `None` for cells whose schedule is undefined (`t + b ≤ 0`); divergent cells score `+∞`.
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub best: PowerDecaySchedule,
    pub best_score: f64,
    pub cells: Vec<GridCell>,
}

/// Scores a schedule on the family's training draws; lower is better.
///
/// Families with exact moments use the mean MSE of the identity and square test functions;
/// logistic regression uses the negative mean test log-likelihood.
pub fn score_schedule<S: Sampler + ?Sized>(sampler: &S, family: &Family, cfg: &GridSearchConfig) -> Result<f64> {
    let mut total = 0.0;
    for draw in 0..cfg.train_draws {
        let mut trng = derived(cfg.seed, TAG_GRID, draw as u64);
        let member = family.draw(&mut trng);
        let mut srng = derived(cfg.seed, TAG_SAMPLES ^ TAG_GRID, draw as u64);
        let value = match &member {
            FamilyMember::LogReg { target, test } => {
                -classify_dataset(sampler, target, test, cfg.n, &mut srng)?.log_likelihood
            }
            _ => {
                let rows = mse_on_target(sampler, &member, &[MomentSpec::Identity, MomentSpec::Square], &[cfg.n], &mut srng)?;
                rows.iter().map(|r| r.2).sum::<f64>() / rows.len() as f64
            }
        };
        total += value;
    }
    Ok(total / cfg.train_draws as f64)
}

/// Exhaustive search over power-decay cells; ties go to the smaller `a`, then smaller `b`.
pub fn grid_search_baseline(
    family: &Family,
    steps: usize,
    grid: &[(i32, i32)],
    cfg: &GridSearchConfig,
) -> Result<GridResult> {
    if cfg.train_draws == 0 || cfg.n == 0 {
        return Err(Error::InvalidArgument("grid search needs train_draws ≥ 1 and n ≥ 1".into()));
    }
    let dim = family.dim();
    let cells: Vec<GridCell> = grid
        .par_iter()
        .map(|&(a, b)| {
            let schedule = PowerDecaySchedule { a, b, gamma: cfg.gamma };
            let sampler = match schedule.sampler(dim, steps) {
                Ok(s) => s,
                Err(_) => return Ok(GridCell { a, b, score: None }),
            };
            let score = match score_schedule(&sampler, family, cfg) {
                Ok(v) if v.is_finite() => v,
                Ok(_) | Err(Error::NonFinite { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            Ok(GridCell { a, b, score: Some(score) })
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<&GridCell> = cells.iter().filter(|c| c.score.is_some()).collect();
    order.sort_by_key(|c| (c.a, c.b));
    let mut best: Option<&GridCell> = None;
    for c in order {
        let s = c.score.unwrap();
        if s.is_finite() && best.is_none_or(|b| s < b.score.unwrap()) {
            best = Some(c);
        }
    }
    let best = best.ok_or_else(|| Error::InvalidArgument("every grid cell is invalid or divergent".into()))?;
    Ok(GridResult {
        best: PowerDecaySchedule {
            a: best.a,
            b: best.b,
            gamma: cfg.gamma,
        },
        best_score: best.score.unwrap(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::targets::FamilySpec;

    #[test]
    fn power_decay_examples() {
        assert_eq!(power_decay_step(0, 1, 0.55, 0).unwrap(), 1.0);
        assert!((power_decay_step(-2, 1, 0.55, 0).unwrap() - 0.01).abs() < 1e-18);
        // 10^0 / 10^0.55
        assert!((power_decay_step(0, 1, 0.55, 9).unwrap() - 0.281_838_293_126_445_5).abs() < 1e-12);
        assert!(power_decay_step(0, 0, 0.55, 0).is_err());
        assert!(power_decay_step(0, 0, 0.55, 1).is_ok());
    }

    #[test]
    fn grid_has_ninety_cells() {
        let g = default_grid();
        assert_eq!(g.len(), 90);
        assert_eq!(g[0], (-6, 0));
        assert_eq!(g[89], (2, 9));
    }

    #[test]
    fn gmm_moment_examples() {
        let one = GaussianMixture::new(vec![vec![0.0]], 0.1).unwrap();
        assert_eq!(exact_moments_gmm(&one, MomentSpec::Identity), vec![0.0]);
        assert!((exact_moments_gmm(&one, MomentSpec::Square)[0] - 0.01).abs() < 1e-15);
        let two = GaussianMixture::new(vec![vec![-1.0], vec![1.0]], 0.1).unwrap();
        assert_eq!(exact_moments_gmm(&two, MomentSpec::Identity), vec![0.0]);
        assert!((exact_moments_gmm(&two, MomentSpec::Square)[0] - 1.01).abs() < 1e-12);
        let unit = GaussianMixture::new(vec![vec![0.0]], 1.0).unwrap();
        let c = exact_moments_gmm(&unit, MomentSpec::Cosine { w: 1.0, b: 0.0 })[0];
        assert!((c - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rbm_moment_examples() {
        let flat = GaussBernoulliRbm::new(vec![0.0; 6], vec![0.5, -1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let m = exact_moments_rbm(&flat, MomentSpec::Identity).unwrap();
        let s = exact_moments_rbm(&flat, MomentSpec::Square).unwrap();
        for j in 0..3 {
            assert!((m[j] - flat.visible_bias()[j]).abs() < 1e-12);
            assert!((s[j] - 1.0 - flat.visible_bias()[j].powi(2)).abs() < 1e-12);
        }
        let tiny = GaussBernoulliRbm::new(vec![0.1], vec![0.0], vec![0.0]).unwrap();
        assert!(exact_moments_rbm(&tiny, MomentSpec::Identity).unwrap()[0].abs() < 1e-15);
        assert!((exact_moments_rbm(&tiny, MomentSpec::Square).unwrap()[0] - 1.01).abs() < 1e-12);
        let wide = GaussBernoulliRbm::new(vec![0.0; 21], vec![0.0], vec![0.0; 21]).unwrap();
        assert!(exact_moments_rbm(&wide, MomentSpec::Identity).is_err());
    }

    /// A sampler that returns the same point every time.
    struct PointMass(Vec<f64>);
    impl Sampler for PointMass {
        fn sample(&self, _t: &dyn TargetDensity, n: usize, _r: &mut SamplerRng) -> Result<ParticleSet> {
            let rows = vec![self.0.clone(); n];
            ParticleSet::from_rows(&rows)
        }
    }

    #[test]
    fn point_mass_at_mean_has_zero_identity_mse() {
        let g = GaussianMixture::new(vec![vec![0.3, -0.2], vec![0.5, 0.6]], 0.1).unwrap();
        let member = FamilyMember::Gmm(g.clone());
        let truth = exact_moments_gmm(&g, MomentSpec::Identity);
        let rows = mse_on_target(&PointMass(truth), &member, &[MomentSpec::Identity], &[1], &mut seeded(0)).unwrap();
        assert!(rows[0].2 < 1e-30);
    }

    #[test]
    fn trial_order_does_not_change_means() {
        let fam = Family::from(FamilySpec::gmm(1));
        let s = PowerDecaySchedule::new(-2, 1).sampler(1, 10).unwrap();
        let recs = mse_table(&s, &fam, &[MomentKind::Identity, MomentKind::Square], &[50], 6, 3).unwrap();
        let mut rev = recs.clone();
        rev.reverse();
        for k in [MomentKind::Identity, MomentKind::Square] {
            assert!((mean_mse(&recs, k, 50) - mean_mse(&rev, k, 50)).abs() < 1e-15);
        }
        assert_eq!(recs, mse_table(&s, &fam, &[MomentKind::Identity, MomentKind::Square], &[50], 6, 3).unwrap());
    }

    #[test]
    fn separable_point_posterior_is_perfect() {
        let test = Dataset::new(vec![1.0, -1.0], vec![1.0, 0.0], 1).unwrap();
        let w = ParticleSet::new(1, 1, vec![50.0]).unwrap();
        let r = predictive_scores(&w, &test);
        assert_eq!(r.accuracy, 1.0);
        let many = ParticleSet::new(7, 1, vec![50.0; 7]).unwrap();
        assert_eq!(predictive_scores(&many, &test), r);
    }

    #[test]
    fn single_cell_grid_wins() {
        let fam = Family::from(FamilySpec::gmm(1));
        let cfg = GridSearchConfig {
            train_draws: 2,
            n: 50,
            ..GridSearchConfig::default()
        };
        let r = grid_search_baseline(&fam, 5, &[(-2, 3)], &cfg).unwrap();
        assert_eq!((r.best.a, r.best.b), (-2, 3));
        assert!(grid_search_baseline(&fam, 5, &[(0, 0)], &cfg).is_err());
    }
}
