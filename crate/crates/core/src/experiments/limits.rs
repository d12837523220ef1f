//! Limit studies and the uniform moment probe.

use crate::bodies::{BlockSampleMatrix, StarBody, SupportBody};
use crate::centroid::{empirical_dual_centroid, ExactLpIntersection, IntersectionBody};
use crate::densities::Density;
use crate::error::{invalid, Error, Result};
use crate::experiments::functional::{
    block_bodies, check_functional, empirical_volume, exact_volume, ColumnLaw, Functional, Mode,
    MIN_MC_POINTS, MIN_TRIALS,
};
use crate::experiments::report::TrendReport;
use crate::numerics::constants::sinh_scale;
use crate::numerics::rng::{par_blocks, RngStream};
use crate::numerics::sphere::{sphere_quadrature, SphereMode};
use crate::numerics::stats::MeanAcc;
use crate::volume::{volume_radial_at, Estimate};

#[derive(Debug, Clone)]
pub enum StudySpec {
    /// `E|Z_{p,C,N}|` towards `|Z_{p,C}(f)|`; `C` must be a segment so the
    /// target has a quadrature oracle.
    NToInfinity {
        f: Density,
        body: SupportBody,
        p: f64,
        ns: Vec<usize>,
        trials: usize,
        resolution: usize,
    },
    /// `(2 asinh(1/alpha))^{-n} |I_1^alpha(f)|` towards `|I(f)|`.
    AlphaToZero {
        f: Density,
        alphas: Vec<f64>,
        resolution: usize,
    },
    /// `E|Z_{p,C_m^alpha,N}(F_m)|` towards `E|I_{|p|,N}^alpha(f)|`, where each
    /// block of `F_m` has its first column from `f` and `m` columns uniform
    /// on the unit ball.
    MToInfinity {
        f: Density,
        p: f64,
        alpha: f64,
        n_blocks: usize,
        ms: Vec<usize>,
        trials: usize,
        resolution: usize,
    },
}

impl StudySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StudySpec::NToInfinity { .. } => "N_to_infinity",
            StudySpec::AlphaToZero { .. } => "alpha_to_zero",
            StudySpec::MToInfinity { .. } => "m_to_infinity",
        }
    }
}

fn has_marginal(f: &Density) -> bool {
    let mut u = vec![0.0; f.dim()];
    u[0] = 1.0;
    f.marginal(&u).is_ok()
}

fn nonempty<T>(v: &[T], field: &str) -> Result<()> {
    if v.is_empty() {
        Err(invalid(field, "need at least one parameter value"))
    } else {
        Ok(())
    }
}

/// Error sequence of a limit study against its oracle target.
pub fn convergence_study(spec: &StudySpec, stream: &RngStream) -> Result<TrendReport> {
    match spec {
        StudySpec::NToInfinity {
            f,
            body,
            p,
            ns,
            trials,
            resolution,
        } => {
            nonempty(ns, "ns")?;
            if body.segment_scale().is_none() || !has_marginal(f) || *p <= -1.0 {
                return Err(Error::Unsupported(
                    "no quadrature oracle for the target: need a segment C, a density with marginals and p > -1".into(),
                ));
            }
            let functional = Functional::DualCentroid {
                bodies: vec![body.clone()],
                p: *p,
            };
            for &n_blocks in ns {
                let mode = Mode::Empirical {
                    n_blocks,
                    trials: *trials,
                    resolution: *resolution,
                };
                check_functional(f.dim(), &functional, &mode)?;
            }
            let target = exact_volume(f, &functional, *resolution, MIN_MC_POINTS, stream)?;
            let law = ColumnLaw::Iid(f.clone());
            let values = ns
                .iter()
                .map(|&k| empirical_volume(&law, &functional, k, *trials, *resolution, &stream.child(k as u64)))
                .collect::<Result<Vec<_>>>()?;
            let params = ns.iter().map(|&k| k as f64).collect();
            Ok(TrendReport::against_target(
                "N_to_infinity",
                "N",
                params,
                values,
                target,
                "exact body by marginal quadrature",
            ))
        }
        StudySpec::AlphaToZero {
            f,
            alphas,
            resolution,
        } => {
            nonempty(alphas, "alphas")?;
            if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
                return Err(invalid("alpha", format!("must be positive, got {a}")));
            }
            if !has_marginal(f) {
                return Err(Error::Unsupported(
                    "no quadrature oracle for |I(f)|: the density has no marginals".into(),
                ));
            }
            let n = f.dim() as f64;
            let target = volume_radial_at(&IntersectionBody::new(f.clone())?, *resolution, None)?;
            let values = alphas
                .iter()
                .map(|&a| {
                    let body = ExactLpIntersection::new(f.clone(), -1.0, a)?;
                    let v = volume_radial_at(&body, *resolution, None)?;
                    Ok(v.scaled((2.0 * sinh_scale(a)).powf(-n)))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrendReport::against_target(
                "alpha_to_zero",
                "alpha",
                alphas.clone(),
                values,
                target,
                "intersection body by marginal quadrature",
            ))
        }
        StudySpec::MToInfinity {
            f,
            p,
            alpha,
            n_blocks,
            ms,
            trials,
            resolution,
        } => {
            nonempty(ms, "ms")?;
            let n = f.dim();
            if *n_blocks < n + 1 {
                return Err(Error::Hypothesis(format!(
                    "the limit in m needs N >= n + 1 = {}, got {n_blocks}",
                    n + 1
                )));
            }
            let target_fn = Functional::LpIntersection { p: *p, alpha: *alpha };
            let target_mode = Mode::Empirical {
                n_blocks: *n_blocks,
                trials: *trials,
                resolution: *resolution,
            };
            check_functional(n, &target_fn, &target_mode)?;
            let mut specs = Vec::with_capacity(ms.len());
            for &m in ms {
                let functional = Functional::DualCentroid {
                    bodies: vec![SupportBody::cma(m, *alpha)?],
                    p: *p,
                };
                check_functional(n, &functional, &target_mode)?;
                specs.push((m, functional));
            }
            let target = empirical_volume(
                &ColumnLaw::Iid(f.clone()),
                &target_fn,
                *n_blocks,
                *trials,
                *resolution,
                &stream.named("target"),
            )?;
            let ball = Density::ball(n, 1.0);
            let values = specs
                .iter()
                .map(|(m, functional)| {
                    let mut family = Vec::with_capacity(n_blocks * (m + 1));
                    for _ in 0..*n_blocks {
                        family.push(f.clone());
                        family.extend(std::iter::repeat(ball.clone()).take(*m));
                    }
                    empirical_volume(
                        &ColumnLaw::PerColumn(family),
                        functional,
                        *n_blocks,
                        *trials,
                        *resolution,
                        &stream.child(*m as u64),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let params = ms.iter().map(|&m| m as f64).collect();
            Ok(TrendReport::against_target(
                "m_to_infinity",
                "m",
                params,
                values,
                target,
                "empirical L_p^alpha intersection body at the same N and trial budget",
            ))
        }
    }
}

/// Settings for [`moment_bound_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub p: f64,
    pub eps: f64,
    pub trials: usize,
    pub resolution: usize,
}

/// `sup_u E rho(Z_{p,C,N}, u)^{n+eps}` over a direction grid for
/// `N in {n+1, 2n, 4n, 8n}`.
pub fn moment_bound_probe(
    f: &Density,
    bodies: &[SupportBody],
    cfg: &ProbeConfig,
    stream: &RngStream,
) -> Result<TrendReport> {
    let n = f.dim();
    let p = cfg.p;
    if !f.is_compact() {
        return Err(Error::Hypothesis(
            "the moment bound needs compactly supported densities".into(),
        ));
    }
    if !(cfg.eps > 0.0 && cfg.eps.is_finite()) {
        return Err(invalid("eps", format!("must be positive, got {}", cfg.eps)));
    }
    if !(p >= -1.0 && p.is_finite()) {
        return Err(invalid("p", format!("must lie in [-1, inf), got {p}")));
    }
    if cfg.trials < MIN_TRIALS {
        return Err(invalid(
            "trials",
            format!("need at least {MIN_TRIALS} trials, got {}", cfg.trials),
        ));
    }
    if bodies.is_empty() {
        return Err(invalid("bodies", "need at least one body"));
    }
    if let Some(c) = bodies.iter().find(|c| !(c.inradius() > 0.0)) {
        return Err(Error::Hypothesis(format!(
            "the moment bound needs a common positive inradius; found a body of dimension {} with inradius 0",
            c.dim()
        )));
    }
    if p < 0.0 {
        if let Some(c) = bodies.iter().find(|c| c.dim() < n + 1) {
            return Err(Error::Hypothesis(format!(
                "p < 0 needs every body of dimension >= n + 1 = {}, found {}",
                n + 1,
                c.dim()
            )));
        }
    }
    let ns = [n + 1, 2 * n, 4 * n, 8 * n];
    let grid = sphere_quadrature(n, cfg.resolution, SphereMode::Deterministic, Some(&stream.named("grid")))?;
    let q = n as f64 + cfg.eps;
    let mut values = Vec::with_capacity(ns.len());
    for &big_n in &ns {
        let bs = block_bodies(bodies, big_n)?;
        let widths: Vec<usize> = bs.iter().map(|c| c.dim()).collect();
        let parts = par_blocks(&stream.child(big_n as u64), cfg.trials, |rng, start, end| {
            let mut accs = vec![MeanAcc::default(); grid.len()];
            for _ in start..end {
                let x = BlockSampleMatrix::sample(f, &widths, rng)?;
                let body = empirical_dual_centroid(x, bs.clone(), p)?;
                for (acc, u) in accs.iter_mut().zip(&grid.nodes) {
                    acc.push(body.radial(u).powf(q));
                }
            }
            Ok(accs)
        });
        let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
        let mut best: Option<MeanAcc> = None;
        for j in 0..grid.len() {
            let acc = MeanAcc::merged(parts.iter().map(|v| &v[j]));
            if best.as_ref().map_or(true, |b| acc.mean > b.mean) {
                best = Some(acc);
            }
        }
        let b = best.expect("grid is nonempty");
        values.push(
            Estimate::new(b.mean, b.stderr(), 0.0, cfg.trials as u64, "sup-moment")
                .with_seed(stream.child(big_n as u64)),
        );
    }
    Ok(TrendReport::boundedness(
        "moment_bound",
        "N",
        ns.iter().map(|&k| k as f64).collect(),
        values,
    ))
}
