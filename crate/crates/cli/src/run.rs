//! Config-driven runs and their CSV / summary output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};

use starlab::experiments::{ComparisonReport, TrendReport, Verdict};
use starlab::numerics::rng::RngStream;

use crate::config::{apply_override, parse_document, Catalog, RunConfig};
use crate::registry::{ExperimentRegistry, Outcome, Plan};

pub const CSV_HEADER: &str = "experiment,quantity,parameter,value,stderr,n_samples,seed,config_hash,verdict";

pub const DEFAULT_OUTPUT_DIR: &str = "starlab-out";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub master_seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub name: String,
    pub kind: String,
    pub outcome: Outcome,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub results: Vec<ExperimentResult>,
}

impl RunOutcome {
    pub fn violations(&self) -> usize {
        self.results
            .iter()
            .filter(|r| matches!(&r.outcome, Outcome::Comparison(c) if c.verdict == Verdict::Violation))
            .count()
    }

    /// 0 when clean, 2 when any comparison is a violation.
    pub fn exit_code(&self) -> i32 {
        if self.violations() > 0 {
            2
        } else {
            0
        }
    }
}

/// Load the config, apply overrides and validate it without running anything.
pub fn resolve(opts: &RunOptions) -> Result<RunConfig> {
    let text = fs::read_to_string(&opts.config)
        .with_context(|| format!("reading config {}", opts.config.display()))?;
    let mut doc = parse_document(&text)?;
    for o in &opts.overrides {
        apply_override(&mut doc, o)?;
    }
    if let Some(seed) = opts.master_seed {
        apply_override(&mut doc, &format!("master_seed={seed}"))?;
    }
    let mut cfg = RunConfig::from_value(doc)?;
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    cfg.output_dir = Some(out.to_string_lossy().into_owned());
    Ok(cfg)
}

/// Parse, validate and hypothesis-check every experiment of `cfg`.
pub fn plan_all(cfg: &RunConfig) -> Result<Vec<Box<dyn Plan>>> {
    let catalog = Catalog::build(cfg)?;
    let registry = ExperimentRegistry::default();
    cfg.experiments
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let path = format!("experiments[{i}]");
            registry
                .get(&e.kind)
                .map_err(|err| anyhow!("config error at {path}.kind: {err}"))?
                .plan(&e.params, &catalog, &path)
        })
        .collect()
}

/// Execute a run end to end and write its outputs.
pub fn run(opts: &RunOptions) -> Result<RunOutcome> {
    let cfg = resolve(opts)?;
    let plans = plan_all(&cfg)?;
    let hash = cfg.hash()?;
    let out_dir = PathBuf::from(cfg.output_dir.clone().expect("resolved"));
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    fs::write(out_dir.join("resolved_config.toml"), cfg.to_toml()?)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()
        .context("building the worker pool")?;
    let root = RngStream::new(cfg.master_seed, 0);
    let mut results = Vec::with_capacity(plans.len());
    for (entry, plan) in cfg.experiments.iter().zip(&plans) {
        let t = Instant::now();
        let stream = root.named(&entry.name);
        let outcome = pool
            .install(|| plan.run(&stream))
            .map_err(|e| anyhow!("experiment {:?} failed: {e}", entry.name))?;
        let r = ExperimentResult {
            name: entry.name.clone(),
            kind: entry.kind.clone(),
            outcome,
            wall_time: t.elapsed().as_secs_f64(),
        };
        write_csv(&out_dir, &r, cfg.master_seed, &hash)?;
        results.push(r);
    }
    let outcome = RunOutcome {
        out_dir,
        config_hash: hash,
        results,
    };
    fs::write(outcome.out_dir.join("summary.txt"), summary(&outcome, cfg.master_seed))?;
    Ok(outcome)
}

fn comparison_rows(r: &ComparisonReport) -> Vec<(String, String, f64, f64, u64)> {
    vec![
        ("lhs".into(), String::new(), r.lhs.value, r.lhs.total_error(), r.lhs.n_samples),
        ("rhs".into(), String::new(), r.rhs.value, r.rhs.total_error(), r.rhs.n_samples),
        (
            "margin".into(),
            String::new(),
            r.margin,
            r.margin_stderr,
            r.lhs.n_samples + r.rhs.n_samples,
        ),
        (
            "ratio".into(),
            String::new(),
            r.ratio(),
            r.ratio_stderr(),
            r.lhs.n_samples + r.rhs.n_samples,
        ),
    ]
}

/// Label used in the verdict column of trend rows.
pub fn trend_flag(t: &TrendReport) -> &'static str {
    match t.growth {
        Some(true) => "growth",
        Some(false) => "bounded",
        None if t.monotone => "monotone",
        None => "not-monotone",
    }
}

fn trend_rows(t: &TrendReport) -> Vec<(String, String, f64, f64, u64)> {
    let mut rows = Vec::new();
    if let Some(target) = &t.target {
        rows.push(("target".into(), String::new(), target.value, target.total_error(), target.n_samples));
    }
    for (k, (param, v)) in t.params.iter().zip(&t.values).enumerate() {
        let param = format!("{}={param}", t.parameter);
        rows.push(("value".into(), param.clone(), v.value, v.total_error(), v.n_samples));
        if let (Some(e), Some(s)) = (t.errors.get(k), t.error_stderrs.get(k)) {
            rows.push(("relative_error".into(), param, *e, *s, v.n_samples));
        }
    }
    rows
}

/// CSV body (header included) for one experiment.
pub fn csv_for(r: &ExperimentResult, seed: u64, hash: &str) -> String {
    let (rows, verdict) = match &r.outcome {
        Outcome::Comparison(c) => (comparison_rows(c), c.verdict.label()),
        Outcome::Trend(t) => (trend_rows(t), trend_flag(t)),
    };
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for (quantity, param, value, stderr, n) in rows {
        let _ = writeln!(
            s,
            "{},{quantity},{param},{value:.12e},{stderr:.6e},{n},{seed},{hash},{verdict}",
            r.name
        );
    }
    s
}

fn write_csv(dir: &Path, r: &ExperimentResult, seed: u64, hash: &str) -> Result<()> {
    let path = dir.join(format!("{}.csv", r.name));
    fs::write(&path, csv_for(r, seed, hash)).with_context(|| format!("writing {}", path.display()))
}

/// Human-readable run summary (includes wall times, unlike the CSVs).
pub fn summary(o: &RunOutcome, seed: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "master_seed {seed}");
    let _ = writeln!(s, "config_hash {}", o.config_hash);
    let _ = writeln!(s, "experiments {}", o.results.len());
    let _ = writeln!(s, "violations {}", o.violations());
    for r in &o.results {
        match &r.outcome {
            Outcome::Comparison(c) => {
                let _ = writeln!(
                    s,
                    "{} [{}] {}: lhs {:.6} +- {:.2e}, rhs {:.6} +- {:.2e}, z {:.2} ({:.2}s)",
                    r.name,
                    r.kind,
                    c.verdict,
                    c.lhs.value,
                    c.lhs.total_error(),
                    c.rhs.value,
                    c.rhs.total_error(),
                    c.z_score(),
                    r.wall_time
                );
            }
            Outcome::Trend(t) => {
                let fin = t
                    .final_relative_error
                    .map(|e| format!(", final relative error {e:.4}"))
                    .unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{} [{}] {}{} ({:.2}s)",
                    r.name,
                    r.kind,
                    trend_flag(t),
                    fin,
                    r.wall_time
                );
            }
        }
    }
    s
}
