use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use amortized_sampler::config::RunConfig;
use amortized_sampler::{LangevinSampler, SamplerModel};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_amortized-sampler"));
    c.env("AMORTIZED_SAMPLER_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const GAUSS: &str = r#"
[target]
kind = "gaussian"
mean = [1.0, -0.5]
std = [0.8, 1.2]

[sampler]
steps = 6
block_size = 3

[train]
batch = 20
step_size = 0.05
iterations = 15
eval_batch = 20
log_every = 5
"#;

#[test]
fn zero_iterations_keeps_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &GAUSS.replace("iterations = 15", "iterations = 0"));
    let out = dir.path().join("out");
    let o = run(&["train", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trained = LangevinSampler::load(&out.join("checkpoint.json")).unwrap();
    let init = RunConfig::from_toml(GAUSS).unwrap().sampler.build(2).unwrap();
    assert_eq!(trained, init);
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics, "iteration,rule,ksd_u,seconds,theta_hash\n");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", GAUSS);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["train", "--config", s(&cfg), "--seed", "9", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ma = fs::read(a.join("metrics.csv")).unwrap();
    assert_eq!(ma, fs::read(b.join("metrics.csv")).unwrap());
    assert_eq!(fs::read(a.join("checkpoint.json")).unwrap(), fs::read(b.join("checkpoint.json")).unwrap());
    let text = String::from_utf8(ma).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains('\r'));

    // the manifest alone reproduces the run
    let c = dir.path().join("c");
    let o = run(&["train", "--config", s(&a.join("manifest.toml")), "--out", s(&c)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(a.join("metrics.csv")).unwrap(), fs::read(c.join("metrics.csv")).unwrap());
    let manifest = RunConfig::load(&a.join("manifest.toml")).unwrap();
    assert_eq!(manifest.seed, 9);
    assert_eq!(manifest.manifest.unwrap().command, "train");
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", GAUSS);
    let out = dir.path().join("out");
    let o = run(&["train", "--config", s(&cfg), "--out", s(&out), "--update-rule", "full", "--inner-steps", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = RunConfig::load(&out.join("manifest.toml")).unwrap();
    assert_eq!(m.train.rule.tag(), "full");
    assert_eq!(m.train.inner_steps, 3);
    assert!(fs::read_to_string(out.join("metrics.csv")).unwrap().contains(",full,"));
}

#[test]
fn family_train_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let train_cfg = r#"
[family]
family = "gmm"
dim = 1

[sampler]
steps = 5

[train]
batch = 20
step_size = 0.1
iterations = 10
eval_batch = 10
log_every = 5
"#;
    let cfg = write(dir.path(), "train.toml", train_cfg);
    let out = dir.path().join("t");
    let o = run(&["train", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let hash = metrics.lines().nth(1).unwrap().rsplit(',').next().unwrap();
    assert_eq!(hash.len(), 16);

    let eval_cfg = format!(
        "[family]\nfamily = \"gmm\"\ndim = 1\n[eval]\ncheckpoint = {:?}\nsample_sizes = [10, 50]\ntrials = 3\n",
        s(&out.join("checkpoint.json"))
    );
    let cfg = write(dir.path(), "eval.toml", &eval_cfg);
    let ev = dir.path().join("e");
    let o = run(&["eval", "--config", s(&cfg), "--out", s(&ev), "--refine-steps", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(ev.join("eval.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("family,method,T,spec,n,trial,value"));
    assert_eq!(lines.count(), 3 * 2 * 3);
    assert!(table.contains("gmm,amortized+refine(2),5,cosine,50,2,"));

    let o = run(&["inspect", s(&out.join("checkpoint.json"))]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,block,eta"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn baseline_then_eval_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[family]
family = "gmm"
dim = 1
components = 3

[baseline]
steps = 5
train_draws = 2
n = 50
cells = [[-3, 1], [-2, 1], [-2, 0], [0, 1]]

[eval]
steps = 5
specs = ["identity"]
sample_sizes = [20]
trials = 2
"#;
    let cfg = write(dir.path(), "c.toml", cfg);
    let out = dir.path().join("b");
    let o = run(&["baseline", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 3, "the b = 0 cell is undefined and omitted");
    let best = fs::read_to_string(out.join("best_schedule.toml")).unwrap();

    let eval_cfg = format!("{}\nschedule = {{ {} }}\n", fs::read_to_string(&cfg).unwrap(), best.trim().replace('\n', ", "));
    let cfg = write(dir.path(), "e.toml", &eval_cfg);
    let ev = dir.path().join("e");
    let o = run(&["eval", "--config", s(&cfg), "--out", s(&ev)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(ev.join("eval.csv")).unwrap().contains("power-decay(a="));
}

#[test]
fn svgd_demo_dumps_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[target]
kind = "gmm"
means = [[-0.5, 0.0], [0.5, 0.0]]
sigma = 0.3

[svgd]
particles = 30
iterations = 25
snapshot_every = 10
schedule = { kind = "constant", step = 0.01 }
"#;
    let cfg = write(dir.path(), "c.toml", cfg);
    let out = dir.path().join("d");
    let o = run(&["svgd-demo", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for it in [0, 10, 20, 25] {
        let text = fs::read_to_string(out.join(format!("particles_{it:06}.csv"))).unwrap();
        assert!(text.starts_with("z0,z1\n"));
        assert_eq!(text.lines().count(), 31);
    }
}

#[test]
fn libsvm_posterior_train_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "a.train", "+1 1:0.5 3:1.0\n-1 2:1.0\n+1 1:1.0 2:-0.5\n-1 1:-1.0 3:-0.3\n");
    let test = write(dir.path(), "a.test", "+1 1:0.8\n-1 1:-0.7 2:0.2\n");
    let cfg = format!(
        "[target]\nkind = \"logreg\"\ntrain = {:?}\ntest = {:?}\nfeatures = 3\nminibatch = 2\n\
         [sampler]\nsteps = 4\n[train]\nbatch = 10\niterations = 5\neval_batch = 0\n\
         [eval]\nschedule = {{ a = -2, b = 1 }}\nsteps = 4\nsamples = 20\n",
        s(&train),
        s(&test)
    );
    let cfg = write(dir.path(), "c.toml", &cfg);
    let out = dir.path().join("o");
    let o = run(&["train", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(LangevinSampler::load(&out.join("checkpoint.json")).unwrap().dim(), 4);
    let o = run(&["eval", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("eval.csv")).unwrap();
    assert!(table.contains("logreg,\"power-decay(a=-2,b=1,gamma=0.55)\",4,accuracy,20,0,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let bad_key = write(dir.path(), "bad.toml", "[train]\nbatchsize = 2\n");
    assert_eq!(run(&["train", "--config", s(&bad_key), "--out", s(&out)]).status.code(), Some(2));
    let no_target = write(dir.path(), "empty.toml", "");
    assert_eq!(run(&["train", "--config", s(&no_target), "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(run(&["train", "--config", s(&dir.path().join("missing.toml"))]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let bad_libsvm = write(dir.path(), "x.svm", "+1 2:1 1:1\n");
    let cfg = write(
        dir.path(),
        "l.toml",
        &format!("[target]\nkind = \"logreg\"\ntrain = {:?}\n", s(&bad_libsvm)),
    );
    let o = run(&["train", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    // step sizes of e^60 blow the state up
    let diverge = write(dir.path(), "d.toml", &GAUSS.replace("block_size = 3", "block_size = 3\ninit_log_step = 60.0"));
    assert_eq!(run(&["train", "--config", s(&diverge), "--out", s(&out)]).status.code(), Some(1));
    let missing_ckpt = write(
        dir.path(),
        "m.toml",
        &format!("[family]\nfamily = \"gmm\"\ndim = 1\n[eval]\ncheckpoint = {:?}\n", s(&dir.path().join("none.json"))),
    );
    assert_eq!(run(&["eval", "--config", s(&missing_ckpt), "--out", s(&out)]).status.code(), Some(1));
    let bad_threads = bin().env("AMORTIZED_SAMPLER_THREADS", "zero").args(["inspect", "x"]).output().unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}
