//! Experiment kinds selectable by name from a run config.

use anyhow::{anyhow, bail, Result};
use serde::Deserialize;

use starlab::bodies::SupportBody;
use starlab::experiments::{
    ball_flattening_inequality, busemann_ratio, cefpp_probe, check_functional, convergence_study,
    moment_bound_probe, rearrangement_inequality, CefppVariant, ColumnLaw, ComparisonReport,
    Functional, Mode, PolarMeasure, ProbeConfig, StudySpec, TrendReport, MIN_MC_POINTS,
    MIN_TRIALS,
};
use starlab::numerics::rng::RngStream;

use crate::config::{parse_at, Catalog};

/// Result of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Comparison(ComparisonReport),
    Trend(TrendReport),
}

/// A validated experiment, ready to run.
pub trait Plan: Send + Sync {
    fn run(&self, stream: &RngStream) -> starlab::Result<Outcome>;
}

/// A named experiment kind. `plan` parses and validates parameters, and
/// checks hypotheses, without sampling anything.
pub trait Experiment: Send + Sync {
    fn kind(&self) -> &'static str;
    fn plan(&self, params: &toml::Table, catalog: &Catalog, path: &str) -> Result<Box<dyn Plan>>;
}

pub struct ExperimentRegistry {
    kinds: Vec<Box<dyn Experiment>>,
}

impl Default for ExperimentRegistry {
    fn default() -> Self {
        let mut r = Self { kinds: Vec::new() };
        r.register(Box::new(Rearrangement));
        r.register(Box::new(BallFlattening));
        r.register(Box::new(Busemann));
        r.register(Box::new(Convergence));
        r.register(Box::new(MomentBound));
        r.register(Box::new(Cefpp));
        r
    }
}

impl ExperimentRegistry {
    /// Add a kind, replacing any kind of the same name.
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.kinds.retain(|k| k.kind() != e.kind());
        self.kinds.push(e);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.kinds.iter().map(|k| k.kind()).collect()
    }

    pub fn get(&self, kind: &str) -> Result<&dyn Experiment> {
        self.kinds
            .iter()
            .find(|k| k.kind() == kind)
            .map(|k| k.as_ref())
            .ok_or_else(|| anyhow!("unknown experiment kind {kind:?}; known kinds: {}", self.names().join(", ")))
    }
}

fn params<T: for<'de> Deserialize<'de>>(table: &toml::Table, path: &str) -> Result<T> {
    parse_at(toml::Value::Table(table.clone()), path)
}

fn hypothesis(path: &str, e: starlab::Error) -> anyhow::Error {
    anyhow!("{path}: {e}")
}

fn default_trials() -> usize {
    MIN_TRIALS
}

fn default_mc() -> usize {
    MIN_MC_POINTS
}

fn default_resolution() -> usize {
    128
}

/// Column law from `density` or the per-column `densities`.
fn column_law(
    catalog: &Catalog,
    density: &Option<String>,
    densities: &Option<Vec<String>>,
    path: &str,
) -> Result<ColumnLaw> {
    match (density, densities) {
        (Some(d), None) => Ok(ColumnLaw::Iid(catalog.density(d, &format!("{path}.density"))?)),
        (None, Some(ds)) if !ds.is_empty() => Ok(ColumnLaw::PerColumn(
            ds.iter()
                .enumerate()
                .map(|(i, d)| catalog.density(d, &format!("{path}.densities[{i}]")))
                .collect::<Result<_>>()?,
        )),
        _ => bail!("config error at {path}: give exactly one of density or densities"),
    }
}

fn body_list(
    catalog: &Catalog,
    body: &Option<String>,
    bodies: &Option<Vec<String>>,
    path: &str,
) -> Result<Vec<SupportBody>> {
    match (body, bodies) {
        (Some(b), None) => Ok(vec![catalog.body(b, &format!("{path}.body"))?]),
        (None, Some(bs)) if !bs.is_empty() => bs
            .iter()
            .enumerate()
            .map(|(i, b)| catalog.body(b, &format!("{path}.bodies[{i}]")))
            .collect(),
        _ => bail!("config error at {path}: give exactly one of body or bodies"),
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum FunctionalKind {
    DualCentroid,
    LpIntersection,
    Intersection,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ModeKind {
    Exact,
    Empirical,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InequalityParams {
    density: Option<String>,
    densities: Option<Vec<String>>,
    #[serde(default = "dual_centroid")]
    functional: FunctionalKind,
    body: Option<String>,
    bodies: Option<Vec<String>>,
    p: Option<f64>,
    alpha: Option<f64>,
    mode: ModeKind,
    n_blocks: Option<usize>,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_resolution")]
    resolution: usize,
    #[serde(default = "default_mc")]
    mc_samples: usize,
}

fn dual_centroid() -> FunctionalKind {
    FunctionalKind::DualCentroid
}

struct InequalityPlan {
    law: ColumnLaw,
    functional: Functional,
    mode: Mode,
    flatten: bool,
}

impl Plan for InequalityPlan {
    fn run(&self, stream: &RngStream) -> starlab::Result<Outcome> {
        let r = if self.flatten {
            ball_flattening_inequality(&self.law, &self.functional, &self.mode, stream)?
        } else {
            rearrangement_inequality(&self.law, &self.functional, &self.mode, stream)?
        };
        Ok(Outcome::Comparison(r))
    }
}

fn plan_inequality(table: &toml::Table, catalog: &Catalog, path: &str, flatten: bool) -> Result<Box<dyn Plan>> {
    let p: InequalityParams = params(table, path)?;
    let law = column_law(catalog, &p.density, &p.densities, path)?;
    let need_p = || p.p.ok_or_else(|| anyhow!("config error at {path}.p: missing field"));
    let functional = match p.functional {
        FunctionalKind::DualCentroid => Functional::DualCentroid {
            bodies: body_list(catalog, &p.body, &p.bodies, path)?,
            p: need_p()?,
        },
        FunctionalKind::LpIntersection => Functional::LpIntersection {
            p: need_p()?,
            alpha: p.alpha.ok_or_else(|| anyhow!("config error at {path}.alpha: missing field"))?,
        },
        FunctionalKind::Intersection => Functional::Intersection,
    };
    let mode = match p.mode {
        ModeKind::Exact => Mode::Exact {
            resolution: p.resolution,
            mc_samples: p.mc_samples,
        },
        ModeKind::Empirical => Mode::Empirical {
            n_blocks: p
                .n_blocks
                .ok_or_else(|| anyhow!("config error at {path}.n_blocks: required in empirical mode"))?,
            trials: p.trials,
            resolution: p.resolution,
        },
    };
    check_functional(law.dim(), &functional, &mode).map_err(|e| hypothesis(path, e))?;
    if flatten {
        if let Functional::DualCentroid { bodies, p } = &functional {
            if *p > 1.0 || bodies.iter().any(|c| !c.is_unconditional()) {
                bail!("{path}: ball flattening needs p <= 1 and every body C unconditional");
            }
        }
    }
    Ok(Box::new(InequalityPlan {
        law,
        functional,
        mode,
        flatten,
    }))
}

struct Rearrangement;

impl Experiment for Rearrangement {
    fn kind(&self) -> &'static str {
        "rearrangement"
    }
    fn plan(&self, params: &toml::Table, catalog: &Catalog, path: &str) -> Result<Box<dyn Plan>> {
        plan_inequality(params, catalog, path, false)
    }
}

struct BallFlattening;

impl Experiment for BallFlattening {
    fn kind(&self) -> &'static str {
        "ball_flattening"
    }
    fn plan(&self, params: &toml::Table, catalog: &Catalog, path: &str) -> Result<Box<dyn Plan>> {
        plan_inequality(params, catalog, path, true)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusemannParams {
    density: String,
    #[serde(default = "busemann_resolution")]
    resolution: usize,
}

fn busemann_resolution() -> usize {
    256
}

struct BusemannPlan {
    f: starlab::densities::Density,
    resolution: usize,
}

impl Plan for BusemannPlan {
    fn run(&self, _stream: &RngStream) -> starlab::Result<Outcome> {
        Ok(Outcome::Comparison(busemann_ratio(&self.f, self.resolution)?))
    }
}

struct Busemann;

impl Experiment for Busemann {
    fn kind(&self) -> &'static str {
        "busemann"
    }
    fn plan(&self, table: &toml::Table, catalog: &Catalog, path: &str) -> Result<Box<dyn Plan>> {
        let p: BusemannParams = params(table, path)?;
        let f = catalog.density(&p.density, &format!("{path}.density"))?;
        if !(f.dim() == 2 || f.dim() == 3) {
            bail!("{path}: busemann supports n = 2 or 3, got n = {}", f.dim());
        }
        if f.uniform_support().is_none() {
            bail!("{path}: busemann needs a uniform density on a star body containing the origin");
        }
        Ok(Box::new(BusemannPlan {
            f,
            resolution: p.resolution,
        }))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvergenceParams {
    study: String,
    density: String,
    body: Option<String>,
    p: Option<f64>,
    alpha: Option<f64>,
    values: Vec<f64>,
    n_blocks: Option<usize>,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_resolution")]
    resolution: usize,
}

fn as_counts(values: &[f64], path: &str) -> Result<Vec<usize>> {
    values
        .iter()
        .map(|v| {
            if *v >= 1.0 && v.fract() == 0.0 {
                Ok(*v as usize)
            } else {
                bail!("config error at {path}.values: {v} is not a positive integer")
            }
        })
        .collect()
}

struct StudyPlan(StudySpec);

impl Plan for StudyPlan {
    fn run(&self, stream: &RngStream) -> starlab::Result<Outcome> {
        Ok(Outcome::Trend(convergence_study(&self.0, stream)?))
    }
}

struct Convergence;

impl Experiment for Convergence {
    fn kind(&self) -> &'static str {
        "convergence"
    }
    fn plan(&self, table: &toml::Table, catalog: &Catalog, path: &str) -> Result<Box<dyn Plan>> {
        let p: ConvergenceParams = params(table, path)?;
        let f = catalog.density(&p.density, &format!("{path}.density"))?;
        let need = |v: Option<f64>, k: &str| v.ok_or_else(|| anyhow!("config error at {path}.{k}: missing field"));
        if p.trials < MIN_TRIALS && p.study != "alpha_to_zero" {
            bail!("config error at {path}.trials: need at least {MIN_TRIALS}");
        }
        let spec = match p.study.as_str() {
            "N_to_infinity" => StudySpec::NToInfinity {
                f,
                body: catalog.body(
                    p.body.as_deref().ok_or_else(|| anyhow!("config error at {path}.body: missing field"))?,
                    &format!("{path}.body"),
                )?,
                p: need(p.p, "p")?,
                ns: as_counts(&p.values, path)?,
                trials: p.trials,
                resolution: p.resolution,
            },
            "alpha_to_zero" => StudySpec::AlphaToZero {
                f,
                alphas: p.values.clone(),
                resolution: p.resolution,
            },
            "m_to_infinity" => StudySpec::MToInfinity {
                f,
                p: need(p.p, "p")?,
                alpha: need(p.alpha, "alpha")?,
                n_blocks: p
                    .n_blocks
                    .ok_or_else(|| anyhow!("config error at {path}.n_blocks: missing field"))?,
                ms: as_counts(&p.values, path)?,
                trials: p.trials,
                resolution: p.resolution,
            },
            other => bail!(
                "config error at {path}.study: unknown study {other:?}; expected N_to_infinity, alpha_to_zero or m_to_infinity"
            ),
        };
        Ok(Box::new(StudyPlan(spec)))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentParams {
    density: String,
    body: Option<String>,
    bodies: Option<Vec<String>>,
    p: f64,
    eps: f64,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "probe_resolution")]
    resolution: usize,
}

fn probe_resolution() -> usize {
    16
}

struct MomentPlan {
    f: starlab::densities::Density,
    bodies: Vec<SupportBody>,
    cfg: ProbeConfig,
}

impl Plan for MomentPlan {
    fn run(&self, stream: &RngStream) -> starlab::Result<Outcome> {
        Ok(Outcome::Trend(moment_bound_probe(&self.f, &self.bodies, &self.cfg, stream)?))
    }
}

struct MomentBound;

impl Experiment for MomentBound {
    fn kind(&self) -> &'static str {
        "moment_bound"
    }
    fn plan(&self, table: &toml::Table, catalog: &Catalog, path: &str) -> Result<Box<dyn Plan>> {
        let p: MomentParams = params(table, path)?;
        let f = catalog.density(&p.density, &format!("{path}.density"))?;
        let bodies = body_list(catalog, &p.body, &p.bodies, path)?;
        if p.p < 0.0 && bodies.iter().any(|c| c.dim() < f.dim() + 1) {
            bail!("{path}: p < 0 needs every body of dimension >= n + 1");
        }
        if !f.is_compact() {
            bail!("{path}: the moment bound needs a compactly supported density");
        }
        Ok(Box::new(MomentPlan {
            f,
            bodies,
            cfg: ProbeConfig {
                p: p.p,
                eps: p.eps,
                trials: p.trials,
                resolution: p.resolution,
            },
        }))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CefppParams {
    density: Option<String>,
    densities: Option<Vec<String>>,
    body: String,
    measure: String,
    #[serde(default = "rearranged")]
    variant: String,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_points")]
    points: usize,
}

fn rearranged() -> String {
    "rearranged".into()
}

fn default_points() -> usize {
    64
}

struct CefppPlan {
    law: ColumnLaw,
    c: SupportBody,
    measure: PolarMeasure,
    variant: CefppVariant,
    trials: usize,
    points: usize,
}

impl Plan for CefppPlan {
    fn run(&self, stream: &RngStream) -> starlab::Result<Outcome> {
        Ok(Outcome::Comparison(cefpp_probe(
            &self.law,
            &self.c,
            self.measure,
            self.variant,
            self.trials,
            self.points,
            stream,
        )?))
    }
}

struct Cefpp;

impl Experiment for Cefpp {
    fn kind(&self) -> &'static str {
        "cefpp"
    }
    fn plan(&self, table: &toml::Table, catalog: &Catalog, path: &str) -> Result<Box<dyn Plan>> {
        let p: CefppParams = params(table, path)?;
        let law = column_law(catalog, &p.density, &p.densities, path)?;
        let c = catalog.body(&p.body, &format!("{path}.body"))?;
        let measure: PolarMeasure = p
            .measure
            .parse()
            .map_err(|e| anyhow!("config error at {path}.measure: {e}"))?;
        let variant = match p.variant.as_str() {
            "rearranged" => CefppVariant::Rearranged,
            "ball_flattened" => {
                if !c.is_unconditional() {
                    bail!("{path}: the ball-flattened comparison needs C unconditional");
                }
                CefppVariant::BallFlattened
            }
            other => bail!("config error at {path}.variant: unknown variant {other:?}"),
        };
        if p.trials < MIN_TRIALS {
            bail!("config error at {path}.trials: need at least {MIN_TRIALS}");
        }
        if let ColumnLaw::PerColumn(fs) = &law {
            if fs.len() != c.dim() {
                bail!("config error at {path}.densities: need one density per coordinate of C ({})", c.dim());
            }
        }
        Ok(Box::new(CefppPlan {
            law,
            c,
            measure,
            variant,
            trials: p.trials,
            points: p.points,
        }))
    }
}
