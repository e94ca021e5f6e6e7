//! Command-line front end. `run_command` returns the process exit code:
//! 0 on success, 1 on a runtime failure, 2 on a configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::amortize::{train, RuleKind, TrainTarget};
use crate::baselines::{classify_dataset, classify_table, grid_search_baseline, mse_table, Refined, Sampler};
use crate::config::{ManifestInfo, RunConfig};
use crate::error::{Error, Result};
use crate::io::{format_float, MetricsWriter, ParticleWriter, TableRow, TableWriter};
use crate::langevin::{LangevinSampler, CHECKPOINT_VERSION};
use crate::model::SamplerModel;
use crate::particles::ParticleSet;
use crate::rng::derived;
use crate::svgd::svgd_run_with;
use crate::targets::{Family, FamilySpec, TargetDensity};

const TAG_DEMO: u64 = 0x6465_6d6f_0000;

pub const ENV_THREADS: &str = "AMORTIZED_SAMPLER_THREADS";

#[derive(Parser, Debug)]
#[command(name = "amortized-sampler", version, about = "Train and evaluate amortized Langevin samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML run configuration; a previous run's manifest.toml also works.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["chain", "full", "linearized", "aksd"])]
    update_rule: Option<String>,
    #[arg(long)]
    inner_steps: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run particle SVGD and dump particle snapshots.
    SvgdDemo(Common),
    /// Train a Langevin sampler; writes checkpoint.json and metrics.csv.
    Train(Common),
    /// Evaluate a checkpoint or a power-decay schedule; writes eval.csv.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Extra power-decay Langevin steps applied to every sample.
        #[arg(long)]
        refine_steps: Option<usize>,
    },
    /// Grid-search the power-decay baseline; writes grid.csv and best_schedule.toml.
    Baseline(Common),
    /// Print a checkpoint's step sizes as CSV.
    Inspect { checkpoint: PathBuf },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                2
            } else {
                1
            }
        }
    }
}

/// Sizes the global rayon pool from `AMORTIZED_SAMPLER_THREADS`, if set.
pub fn init_thread_pool() -> Result<()> {
    let Ok(v) = std::env::var(ENV_THREADS) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{ENV_THREADS} must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(Error::Config(format!("{ENV_THREADS} must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::SvgdDemo(c) => {
            let (cfg, out) = prepare(&c, "svgd-demo", None)?;
            svgd_demo(&cfg, &out)
        }
        Command::Train(c) => {
            let (cfg, out) = prepare(&c, "train", None)?;
            run_train(&cfg, &out)
        }
        Command::Eval { common, refine_steps } => {
            let (cfg, out) = prepare(&common, "eval", refine_steps)?;
            run_eval(&cfg, &out)
        }
        Command::Baseline(c) => {
            let (cfg, out) = prepare(&c, "baseline", None)?;
            run_baseline(&cfg, &out)
        }
        Command::Inspect { checkpoint } => inspect(&checkpoint, &mut std::io::stdout().lock()),
    }
}

/// Loads the config, applies flag overrides, resolves it, creates the output directory
/// and writes the manifest.
fn prepare(c: &Common, command: &str, refine_steps: Option<usize>) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    if let Some(r) = &c.update_rule {
        cfg.train.rule = r.parse::<RuleKind>()?;
    }
    if let Some(l) = c.inner_steps {
        cfg.train.inner_steps = l;
    }
    if let Some(n) = refine_steps {
        cfg.eval.refine_steps = n;
    }
    let mut cfg = cfg.resolve()?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    cfg.out = Some(out.clone());
    std::fs::create_dir_all(&out).map_err(|e| Error::file(&out, e))?;
    let mut manifest = cfg.clone();
    manifest.manifest = Some(ManifestInfo {
        command: command.into(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        checkpoint_format: CHECKPOINT_VERSION,
    });
    let path = out.join("manifest.toml");
    std::fs::write(&path, manifest.to_toml()?).map_err(|e| Error::file(&path, e))?;
    Ok((cfg, out))
}

fn need_family(cfg: &RunConfig) -> Result<Family> {
    cfg.family
        .clone()
        .map(Family::from)
        .ok_or_else(|| Error::Config("this command needs a [family] section".into()))
}

/// The single target of a run: `[target]`, or one draw from `[family]`.
fn single_target(cfg: &RunConfig) -> Result<Arc<dyn TargetDensity>> {
    if let Some(t) = &cfg.target {
        return Ok(t.build()?.target);
    }
    if let Some(f) = &cfg.family {
        let member = Family::from(f.clone()).draw(&mut derived(cfg.seed, TAG_DEMO, 0));
        return Ok(Arc::new(member));
    }
    Err(Error::Config("set a [target] or [family] section".into()))
}

fn svgd_demo(cfg: &RunConfig, out: &Path) -> Result<()> {
    let target = single_target(cfg)?;
    let d = target.dim();
    let s = &cfg.svgd;
    let mut rng = derived(cfg.seed, TAG_DEMO, 1);
    let rows: Vec<Vec<f64>> = (0..s.particles).map(|_| s.init.sample(d, &mut rng)).collect();
    let init = ParticleSet::from_rows(&rows)?;
    let dump = |it: usize, p: &ParticleSet| ParticleWriter::write(&out.join(format!("particles_{it:06}.csv")), p);
    dump(0, &init)?;
    svgd_run_with(&init, target.as_ref(), s.iterations, s.schedule, s.alpha, |it, p| {
        let done = it + 1;
        if done == s.iterations || (s.snapshot_every > 0 && done % s.snapshot_every == 0) {
            dump(done, p)?;
        }
        Ok(())
    })?;
    Ok(())
}

fn run_train(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (model, log) = if let Some(spec) = &cfg.family {
        let family = Family::from(spec.clone());
        let mut model = cfg.sampler.build(family.dim())?;
        let log = train(&mut model, TrainTarget::Family(&family), &cfg.train)?;
        (model, log)
    } else {
        let target = single_target(cfg)?;
        let mut model = cfg.sampler.build(target.dim())?;
        let log = train(&mut model, TrainTarget::Single(target.as_ref()), &cfg.train)?;
        (model, log)
    };
    model.save(&out.join("checkpoint.json"))?;
    MetricsWriter::write(&out.join("metrics.csv"), &log.records)?;
    Ok(())
}

fn schedule_label(cfg: &RunConfig) -> Result<(LangevinSampler, String)> {
    let e = &cfg.eval;
    match (&e.checkpoint, &e.schedule) {
        (Some(p), None) => {
            let s = LangevinSampler::load(p)?;
            Ok((s, e.method.clone().unwrap_or_else(|| "amortized".into())))
        }
        (None, Some(sch)) => {
            let dim = match (&cfg.family, &cfg.target) {
                (Some(f), _) => f.dim(),
                (None, Some(t)) => t.build()?.target.dim(),
                _ => return Err(Error::Config("set a [target] or [family] section".into())),
            };
            let s = sch.sampler(dim, e.steps).map_err(|x| Error::Config(x.to_string()))?;
            let label = format!("power-decay(a={},b={},gamma={})", sch.a, sch.b, sch.gamma);
            Ok((s, e.method.clone().unwrap_or(label)))
        }
        _ => Err(Error::Config("eval needs exactly one of eval.checkpoint or eval.schedule".into())),
    }
}

fn run_eval(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (base, mut method) = schedule_label(cfg)?;
    let steps = base.steps();
    let e = &cfg.eval;
    let sampler: Box<dyn Sampler> = if e.refine_steps > 0 {
        method = format!("{method}+refine({})", e.refine_steps);
        Box::new(Refined::new(base.clone(), e.refine, e.refine_steps, base.dim())?)
    } else {
        Box::new(base)
    };
    let row = |family: &str, spec: &str, n: usize, trial: usize, value: f64| TableRow {
        family: family.into(),
        method: method.clone(),
        steps,
        spec: spec.into(),
        n,
        trial,
        value,
    };
    let mut rows = Vec::new();
    match (&cfg.family, &cfg.target) {
        (Some(spec @ FamilySpec::Logreg { .. }), _) => {
            let family = Family::from(spec.clone());
            for (trial, r) in classify_table(sampler.as_ref(), &family, e.samples, e.trials, cfg.seed)?
                .into_iter()
                .enumerate()
            {
                rows.push(row("logreg", "accuracy", e.samples, trial, r.accuracy));
                rows.push(row("logreg", "log_likelihood", e.samples, trial, r.log_likelihood));
            }
        }
        (Some(spec), _) => {
            let family = Family::from(spec.clone());
            let name = family.name();
            for r in mse_table(sampler.as_ref(), &family, &e.specs, &e.sample_sizes, e.trials, cfg.seed)? {
                rows.push(row(name, r.spec.tag(), r.n, r.trial, r.value));
            }
        }
        (None, Some(t)) => {
            let built = t.build()?;
            let test = built
                .test
                .ok_or_else(|| Error::Config("single-target eval needs a logreg target with a test file".into()))?;
            let mut rng = derived(cfg.seed, TAG_DEMO, 2);
            let r = classify_dataset(sampler.as_ref(), built.target.as_ref(), &test, e.samples, &mut rng)?;
            rows.push(row(built.name, "accuracy", e.samples, 0, r.accuracy));
            rows.push(row(built.name, "log_likelihood", e.samples, 0, r.log_likelihood));
        }
        (None, None) => return Err(Error::Config("set a [target] or [family] section".into())),
    }
    TableWriter::write(&out.join("eval.csv"), &rows)
}

fn run_baseline(cfg: &RunConfig, out: &Path) -> Result<()> {
    let family = need_family(cfg)?;
    let b = &cfg.baseline;
    let result = grid_search_baseline(&family, b.steps, &b.grid(), &b.search(cfg.seed))?;
    let spec = if matches!(family, Family::Spec(FamilySpec::Logreg { .. })) {
        "neg_log_likelihood"
    } else {
        "mean_mse"
    };
    let rows: Vec<TableRow> = result
        .cells
        .iter()
        .filter_map(|c| {
            c.score.map(|v| TableRow {
                family: family.name().into(),
                method: format!("power-decay(a={},b={},gamma={})", c.a, c.b, b.gamma),
                steps: b.steps,
                spec: spec.into(),
                n: b.n,
                trial: 0,
                value: v,
            })
        })
        .collect();
    TableWriter::write(&out.join("grid.csv"), &rows)?;
    let best = toml::to_string(&result.best).map_err(|e| Error::Config(e.to_string()))?;
    let path = out.join("best_schedule.toml");
    std::fs::write(&path, &best).map_err(|e| Error::file(&path, e))?;
    println!(
        "best: a={} b={} gamma={} score={}",
        result.best.a,
        result.best.b,
        result.best.gamma,
        format_float(result.best_score)
    );
    Ok(())
}

fn inspect(path: &Path, w: &mut impl Write) -> Result<()> {
    let s = LangevinSampler::load(path)?;
    let width = if s.scalar_steps() { 1 } else { s.dim() };
    let mut header = vec!["t".to_string(), "block".to_string()];
    if width == 1 {
        header.push("eta".into());
    } else {
        header.extend((0..width).map(|j| format!("eta{j}")));
    }
    writeln!(w, "{}", header.join(","))?;
    for t in 0..s.steps() {
        let eta = s.step_sizes(t);
        let vals: Vec<String> = eta[..width].iter().map(|x| format_float(*x)).collect();
        writeln!(w, "{},{},{}", t, t / s.block_size(), vals.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_command(["amortized-sampler", "nope"]), 2);
        assert_eq!(run_command(["amortized-sampler", "train", "--update-rule", "bogus"]), 2);
        assert_eq!(run_command(["amortized-sampler", "--help"]), 0);
    }
}
