//! Volumes of the bodies compared by the experiments, exact and empirical.

use crate::bodies::{BlockSampleMatrix, StarBody, SupportBody};
use crate::centroid::{
    dual_centroid_radial_mc, empirical_dual_centroid, lp_intersection_radial_mc,
    marginal_moment, regularized_moment, EmpiricalLpIntersection, ExactDualCentroid,
    ExactLpIntersection, IntersectionBody, McBudget, RadialValue,
};
use crate::densities::Density;
use crate::error::{invalid, Error, Result};
use crate::numerics::constants::unit_ball_volume;
use crate::numerics::rng::{par_blocks, par_map, RngStream};
use crate::numerics::sphere::{sphere_quadrature, SphereGrid, SphereMode};
use crate::numerics::stats::MeanAcc;
use crate::volume::{volume_radial_at, Estimate};

/// Minimum number of trials for an empirical-mode expectation.
pub const MIN_TRIALS: usize = 10_000;

/// Minimum Monte Carlo points per direction when an exact body has no
/// quadrature route.
pub const MIN_MC_POINTS: usize = 100_000;

/// The body whose volume an experiment compares.
#[derive(Debug, Clone)]
pub enum Functional {
    /// `Z_{p,C}^◊`; exact mode uses the single body in `bodies`, empirical
    /// mode uses one body per block (a single body is repeated).
    DualCentroid { bodies: Vec<SupportBody>, p: f64 },
    /// `I_{|p|}^alpha`.
    LpIntersection { p: f64, alpha: f64 },
    /// `I(f)`, exact mode only.
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Exact { resolution: usize, mc_samples: usize },
    Empirical { n_blocks: usize, trials: usize, resolution: usize },
}

impl Mode {
    pub fn resolution(&self) -> usize {
        match self {
            Mode::Exact { resolution, .. } | Mode::Empirical { resolution, .. } => *resolution,
        }
    }
}

/// Columns of `X`: i.i.d. from one density, or one density per column.
#[derive(Debug, Clone)]
pub enum ColumnLaw {
    Iid(Density),
    PerColumn(Vec<Density>),
}

impl ColumnLaw {
    pub fn dim(&self) -> usize {
        match self {
            ColumnLaw::Iid(f) => f.dim(),
            ColumnLaw::PerColumn(fs) => fs.first().map_or(0, |f| f.dim()),
        }
    }

    fn sample(&self, widths: &[usize], rng: &mut rand_chacha::ChaCha8Rng) -> Result<BlockSampleMatrix> {
        match self {
            ColumnLaw::Iid(f) => BlockSampleMatrix::sample(f, widths, rng),
            ColumnLaw::PerColumn(fs) => BlockSampleMatrix::sample_family(fs, widths, rng),
        }
    }
}

/// Whether `n / |p|` is a positive integer.
pub fn integer_ratio(n: usize, p: f64) -> bool {
    let r = n as f64 / p.abs();
    r.is_finite() && r >= 1.0 - 1e-9 && (r - r.round()).abs() < 1e-9
}

fn check_negative_p(n: usize, p: f64) -> Result<()> {
    if p < -1.0 {
        return Err(invalid("p", format!("must be at least -1, got {p}")));
    }
    if !integer_ratio(n, p) {
        return Err(Error::Hypothesis(format!(
            "p = {p} < 0 requires n/|p| to be an integer; n/|p| = {}",
            n as f64 / p.abs()
        )));
    }
    Ok(())
}

/// Expand one body to `n_blocks` copies, or check a per-block list.
pub fn block_bodies(bodies: &[SupportBody], n_blocks: usize) -> Result<Vec<SupportBody>> {
    match bodies.len() {
        0 => Err(invalid("bodies", "need at least one body")),
        1 => Ok(vec![bodies[0].clone(); n_blocks]),
        k if k == n_blocks => Ok(bodies.to_vec()),
        k => Err(Error::DimensionMismatch {
            expected: n_blocks,
            got: k,
        }),
    }
}

/// Reject inputs outside the inequality's hypotheses, before any sampling.
pub fn check_functional(n: usize, functional: &Functional, mode: &Mode) -> Result<()> {
    if mode.resolution() < 8 {
        return Err(invalid("resolution", "must be at least 8"));
    }
    match mode {
        Mode::Exact { mc_samples, .. } if *mc_samples < MIN_MC_POINTS => {
            return Err(invalid(
                "mc_samples",
                format!("exact mode needs at least {MIN_MC_POINTS} points, got {mc_samples}"),
            ))
        }
        Mode::Empirical { trials, .. } if *trials < MIN_TRIALS => {
            return Err(invalid(
                "trials",
                format!("empirical mode needs at least {MIN_TRIALS} trials, got {trials}"),
            ))
        }
        Mode::Empirical { n_blocks: 0, .. } => return Err(invalid("N", "must be at least 1")),
        _ => {}
    }
    match functional {
        Functional::DualCentroid { bodies, p } => {
            if !p.is_finite() {
                return Err(invalid("p", "must be finite"));
            }
            if *p < 0.0 {
                check_negative_p(n, *p)?;
            }
            match mode {
                Mode::Exact { .. } => {
                    if bodies.len() != 1 {
                        return Err(invalid("bodies", "exact mode takes a single body C"));
                    }
                    if *p <= -1.0 {
                        return Err(Error::Hypothesis(
                            "exact dual centroid bodies need p > -1".into(),
                        ));
                    }
                }
                Mode::Empirical { n_blocks, .. } => {
                    let bs = block_bodies(bodies, *n_blocks)?;
                    if *p < 0.0 {
                        if let Some(c) = bs.iter().find(|c| c.dim() < n + 1) {
                            return Err(Error::Hypothesis(format!(
                                "p < 0 needs every body of dimension >= n + 1 = {}, found {}",
                                n + 1,
                                c.dim()
                            )));
                        }
                    }
                }
            }
        }
        Functional::LpIntersection { p, alpha } => {
            if *p >= 0.0 || !p.is_finite() {
                return Err(invalid("p", format!("must lie in [-1, 0), got {p}")));
            }
            check_negative_p(n, *p)?;
            if !(*alpha > 0.0 && alpha.is_finite()) {
                return Err(invalid("alpha", format!("must be positive, got {alpha}")));
            }
        }
        Functional::Intersection => {
            if matches!(mode, Mode::Empirical { .. }) {
                return Err(Error::Unsupported(
                    "the intersection body has no empirical version".into(),
                ));
            }
        }
    }
    Ok(())
}

fn grid_for(n: usize, resolution: usize, stream: &RngStream) -> Result<SphereGrid> {
    sphere_quadrature(n, resolution, SphereMode::Deterministic, Some(&stream.named("grid")))
}

fn has_marginal(f: &Density) -> bool {
    let mut u = vec![0.0; f.dim()];
    u[0] = 1.0;
    f.marginal(&u).is_ok()
}

/// `omega_n sum_j w_j rho_j^n` with `rho_j` estimated independently per node.
fn node_mc_volume<F>(n: usize, resolution: usize, samples: usize, stream: &RngStream, radial: F) -> Result<Estimate>
where
    F: Fn(&[f64], &McBudget) -> Result<RadialValue> + Sync + Send,
{
    let grid = grid_for(n, resolution, stream)?;
    let omega = unit_ball_volume(n)?;
    let vals = par_map(grid.len(), |j| {
        let budget = McBudget {
            samples,
            stream: stream.child(j as u64),
        };
        radial(&grid.nodes[j], &budget)
    });
    let nf = n as f64;
    let (mut v, mut var) = (0.0, 0.0);
    for (r, w) in vals.into_iter().zip(&grid.weights) {
        let r = r?;
        v += w * r.value.powf(nf);
        var += (w * nf * r.value.powf(nf - 1.0) * r.stderr).powi(2);
    }
    let total = (samples * grid.len()) as u64;
    Ok(Estimate::new(omega * v, omega * var.sqrt(), 0.0, total, "exact-mc").with_seed(*stream))
}

/// Volume of the exact (non-random) body of `f`.
///
/// Segment bodies and `L_p^alpha` intersection bodies use marginal
/// quadrature when the marginal is available; other cases fall back to
/// per-direction Monte Carlo with `mc_samples` points.
pub fn exact_volume(
    f: &Density,
    functional: &Functional,
    resolution: usize,
    mc_samples: usize,
    stream: &RngStream,
) -> Result<Estimate> {
    let n = f.dim();
    let marginal = has_marginal(f);
    match functional {
        Functional::DualCentroid { bodies, p } => {
            let c = bodies.first().ok_or_else(|| invalid("bodies", "need a body"))?;
            if c.segment_scale().is_some() && marginal {
                let body = ExactDualCentroid::new(f.clone(), c, *p)?;
                return volume_radial_at(&body, resolution, None);
            }
            node_mc_volume(n, resolution, mc_samples, stream, |u, b| {
                dual_centroid_radial_mc(f, c, *p, u, b)
            })
        }
        Functional::LpIntersection { p, alpha } => {
            if marginal {
                let body = ExactLpIntersection::new(f.clone(), *p, *alpha)?;
                return volume_radial_at(&body, resolution, None);
            }
            node_mc_volume(n, resolution, mc_samples, stream, |u, b| {
                lp_intersection_radial_mc(f, *p, *alpha, u, b)
            })
        }
        Functional::Intersection => {
            let body = IntersectionBody::new(f.clone())?;
            volume_radial_at(&body, resolution, None)
        }
    }
}

/// Per-node control-variate coefficients `c_j w_j` and the control's mean.
struct Controls {
    coef: Vec<f64>,
    mean: f64,
}

fn controls(f: &Density, functional: &Functional, bodies: &[SupportBody], grid: &SphereGrid) -> Option<Controls> {
    let n = grid.dim as f64;
    let mut coef = Vec::with_capacity(grid.len());
    let mut mean = 0.0;
    for (u, w) in grid.nodes.iter().zip(&grid.weights) {
        let m = f.marginal(u).ok()?;
        let (mu, c) = match functional {
            Functional::DualCentroid { p, .. } => {
                let scales: Vec<f64> = bodies.iter().map(|c| c.segment_scale()).collect::<Option<_>>()?;
                let mm = marginal_moment(&m, *p);
                let k = scales.len() as f64;
                if *p == 0.0 {
                    let mu = scales.iter().map(|a| a.ln()).sum::<f64>() / k + mm;
                    (mu, (-n * mu).exp())
                } else {
                    let mu = scales.iter().map(|a| a.powf(*p)).sum::<f64>() / k * mm;
                    (mu, mu.powf(-n / p - 1.0))
                }
            }
            Functional::LpIntersection { p, alpha } => {
                let q = -p;
                let mu = regularized_moment(&m, q, *alpha);
                (mu, mu.powf(n / q - 1.0))
            }
            Functional::Intersection => return None,
        };
        if !(mu.is_finite() && c.is_finite()) {
            return None;
        }
        coef.push(w * c);
        mean += w * c * mu;
    }
    Some(Controls { coef, mean })
}

/// Per-trial volume and, when controls are given, the control statistic.
fn trial(
    x: BlockSampleMatrix,
    functional: &Functional,
    bodies: &[SupportBody],
    grid: &SphereGrid,
    omega: f64,
    ctl: Option<&Controls>,
) -> Result<(f64, f64)> {
    let nf = grid.dim as f64;
    let (mut vol, mut z) = (0.0, 0.0);
    match functional {
        Functional::DualCentroid { p, .. } => {
            let p = *p;
            let body = empirical_dual_centroid(x, bodies.to_vec(), p)?;
            for (j, (u, w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
                let s = body.block_mean(u);
                let rho_n = if p == 0.0 {
                    (-nf * s).exp()
                } else {
                    s.powf(-nf / p)
                };
                vol += w * rho_n;
                if let Some(c) = ctl {
                    z += c.coef[j] * s;
                }
            }
        }
        Functional::LpIntersection { p, alpha } => {
            let q = -p;
            let body = EmpiricalLpIntersection::from_matrix(&x, *p, *alpha)?;
            for (j, (u, w)) in grid.nodes.iter().zip(&grid.weights).enumerate() {
                let rho = body.radial(u);
                vol += w * rho.powf(nf);
                if let Some(c) = ctl {
                    z += c.coef[j] * rho.powf(q);
                }
            }
        }
        Functional::Intersection => {
            return Err(Error::Unsupported(
                "the intersection body has no empirical version".into(),
            ))
        }
    }
    Ok((omega * vol, omega * z))
}

/// Regression-adjusted mean of `y` with control `z` of known mean `ez`.
fn control_variate_mean(pairs: &[(f64, f64)], ez: f64) -> MeanAcc {
    let ys: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let zs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let my = MeanAcc::from_slice(&ys).mean;
    let mz = MeanAcc::from_slice(&zs).mean;
    let (mut sxy, mut szz) = (0.0, 0.0);
    for (y, z) in &pairs[..] {
        sxy += (y - my) * (z - mz);
        szz += (z - mz) * (z - mz);
    }
    let b = if szz > 0.0 { sxy / szz } else { 0.0 };
    let adj: Vec<f64> = pairs.iter().map(|(y, z)| y - b * (z - ez)).collect();
    MeanAcc::from_slice(&adj)
}

/// `E|K_N|` for the empirical body built from `N` blocks, averaged over
/// `trials` independent draws of `X`.
///
/// When the columns are i.i.d. with computable marginals and the per-node
/// expectations are available in closed form, the linearised volume is used
/// as a control variate (method `empirical-cv`).
pub fn empirical_volume(
    law: &ColumnLaw,
    functional: &Functional,
    n_blocks: usize,
    trials: usize,
    resolution: usize,
    stream: &RngStream,
) -> Result<Estimate> {
    let n = law.dim();
    if trials < 2 {
        return Err(invalid("trials", "need at least 2 trials"));
    }
    let (bodies, widths) = match functional {
        Functional::DualCentroid { bodies, .. } => {
            let bs = block_bodies(bodies, n_blocks)?;
            let widths: Vec<usize> = bs.iter().map(|c| c.dim()).collect();
            (bs, widths)
        }
        Functional::LpIntersection { .. } => (Vec::new(), vec![1; n_blocks]),
        Functional::Intersection => {
            return Err(Error::Unsupported(
                "the intersection body has no empirical version".into(),
            ))
        }
    };
    let grid = grid_for(n, resolution, stream)?;
    let omega = unit_ball_volume(n)?;
    let ctl = match law {
        ColumnLaw::Iid(f) => controls(f, functional, &bodies, &grid),
        ColumnLaw::PerColumn(_) => None,
    };
    let draws = stream.named("trials");
    let parts = par_blocks(&draws, trials, |rng, start, end| {
        (start..end)
            .map(|_| {
                let x = law.sample(&widths, rng)?;
                trial(x, functional, &bodies, &grid, omega, ctl.as_ref())
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut pairs = Vec::with_capacity(trials);
    for p in parts {
        pairs.extend(p?);
    }
    let (acc, method) = match &ctl {
        Some(c) => (control_variate_mean(&pairs, omega * c.mean), "empirical-cv"),
        None => {
            let ys: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            (MeanAcc::from_slice(&ys), "empirical")
        }
    };
    Ok(Estimate::new(acc.mean, acc.stderr(), 0.0, trials as u64, method).with_seed(*stream))
}

/// Volume (exact) or expected volume (empirical) of the body of `law`.
pub fn functional_volume(
    law: &ColumnLaw,
    functional: &Functional,
    mode: &Mode,
    stream: &RngStream,
) -> Result<Estimate> {
    match (mode, law) {
        (Mode::Exact { resolution, mc_samples }, ColumnLaw::Iid(f)) => {
            exact_volume(f, functional, *resolution, *mc_samples, stream)
        }
        (Mode::Exact { .. }, ColumnLaw::PerColumn(_)) => Err(Error::Unsupported(
            "exact bodies take a single density".into(),
        )),
        (Mode::Empirical { n_blocks, trials, resolution }, _) => {
            empirical_volume(law, functional, *n_blocks, *trials, *resolution, stream)
        }
    }
}
