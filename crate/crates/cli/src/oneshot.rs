//! One-shot commands: constants, volumes and radial values of simple bodies.

use anyhow::{anyhow, bail, Context, Result};

use starlab::bodies::{BallBody, FnBody, PolarBody, StarBody, SupportBody};
use starlab::numerics::constants::{gaussian_neg_moment, ln_a_nnp, ln_c_np, ln_d_p, unit_ball_volume};
use starlab::numerics::rng::RngStream;
use starlab::volume::{Estimate, EstimatorRegistry, VolumePlan};

fn arg<T: std::str::FromStr>(args: &[String], i: usize, what: &str) -> Result<T> {
    let raw = args
        .get(i)
        .ok_or_else(|| anyhow!("missing argument {what}"))?;
    raw.parse()
        .map_err(|_| anyhow!("argument {what}: cannot parse {raw:?}"))
}

/// Names accepted by [`constant`], with their argument lists.
pub const CONSTANTS: &[(&str, &str)] = &[
    ("omega", "n"),
    ("b", "n s"),
    ("c", "n p"),
    ("d", "p"),
    ("a", "N n p"),
];

/// `omega n`, `b n s`, `c n p`, `d p` or `a N n p`.
pub fn constant(name: &str, args: &[String]) -> Result<f64> {
    let pos = |p: f64| -> Result<f64> {
        if p > 0.0 && p.is_finite() {
            Ok(p)
        } else {
            bail!("p must be positive, got {p}")
        }
    };
    let v = match name {
        "omega" => unit_ball_volume(arg(args, 0, "n")?)?,
        "b" => gaussian_neg_moment(arg(args, 0, "n")?, arg(args, 1, "s")?)?,
        "c" => ln_c_np(arg(args, 0, "n")?, pos(arg(args, 1, "p")?)?).exp(),
        "d" => ln_d_p(pos(arg(args, 0, "p")?)?).exp(),
        "a" => {
            let p: f64 = arg(args, 2, "p")?;
            if !(p > 0.0 && p < 2.0) {
                bail!("a needs 0 < p < 2, got {p}");
            }
            ln_a_nnp(arg(args, 0, "N")?, arg(args, 1, "n")?, p).exp()
        }
        other => {
            let known: Vec<String> = CONSTANTS.iter().map(|(n, a)| format!("{n} {a}")).collect();
            bail!("unknown constant {other:?}; known: {}", known.join(", "))
        }
    };
    Ok(v)
}

fn numbers(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("cannot parse {s:?} as a number")))
        .collect()
}

/// Star body from a short spec:
///
/// * `unit-disc`
/// * `ball:<n>:<r>`
/// * `shifted-ball:<r>:<c1,c2,...>`
/// * `cube:<n>:<half-width>`
/// * `cross-polytope:<n>:<scale>` (the polar of the cube of half-width `1/scale`)
pub fn parse_body(spec: &str) -> Result<Box<dyn StarBody>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let field = |i: usize| -> Result<&str> {
        parts
            .get(i)
            .copied()
            .ok_or_else(|| anyhow!("body spec {spec:?} is missing a field"))
    };
    let body: Box<dyn StarBody> = match parts[0] {
        "unit-disc" => Box::new(BallBody::centered(2, 1.0)?),
        "ball" => {
            let n: usize = field(1)?.parse().context("ball dimension")?;
            let r: f64 = field(2)?.parse().context("ball radius")?;
            Box::new(BallBody::centered(n, r)?)
        }
        "shifted-ball" => {
            let r: f64 = field(1)?.parse().context("ball radius")?;
            Box::new(BallBody::new(numbers(field(2)?)?, r)?)
        }
        "cube" => {
            let n: usize = field(1)?.parse().context("cube dimension")?;
            let h: f64 = field(2)?.parse().context("cube half-width")?;
            if !(h > 0.0) {
                bail!("cube half-width must be positive");
            }
            Box::new(FnBody::new(n, move |u: &[f64]| {
                h / u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }))
        }
        "cross-polytope" => {
            let n: usize = field(1)?.parse().context("cross-polytope dimension")?;
            let s: f64 = field(2)?.parse().context("cross-polytope scale")?;
            Box::new(PolarBody(SupportBody::cube(n, 1.0 / s)?))
        }
        other => bail!(
            "unknown body {other:?}; expected unit-disc, ball:n:r, shifted-ball:r:c, cube:n:h or cross-polytope:n:s"
        ),
    };
    if parts.len() > expected_fields(parts[0]) {
        bail!("body spec {spec:?} has too many fields");
    }
    Ok(body)
}

fn expected_fields(kind: &str) -> usize {
    match kind {
        "unit-disc" => 1,
        _ => 3,
    }
}

/// Volume of a body spec with a registered estimator.
pub fn volume(method: &str, body: &str, plan: &VolumePlan) -> Result<Estimate> {
    let registry = EstimatorRegistry::default();
    let estimator = registry.get(method)?;
    let body = parse_body(body)?;
    Ok(estimator.estimate(body.as_ref(), plan)?)
}

/// `rho(K, u)` for a body spec and comma-separated direction, normalized to
/// unit length first.
pub fn radial(body: &str, direction: &str) -> Result<f64> {
    let body = parse_body(body)?;
    let u = numbers(direction)?;
    if u.len() != body.dim() {
        bail!("direction has {} entries, body has dimension {}", u.len(), body.dim());
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        bail!("direction must be nonzero and finite");
    }
    let u: Vec<f64> = u.iter().map(|v| v / norm).collect();
    Ok(body.radial(&u))
}

pub fn default_plan(seed: u64) -> VolumePlan {
    VolumePlan {
        stream: RngStream::new(seed, 0),
        ..VolumePlan::default()
    }
}
