//! Volume of a star body from its radial function: sphere quadrature, the
//! Gaussian-moment identity and the exponential integral.

use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::ln_gamma;

use super::estimate::Estimate;
use crate::bodies::StarBody;
use crate::error::{invalid, Error, Result};
use crate::numerics::constants::{gaussian_neg_moment, ln_c_np, unit_ball_volume};
use crate::numerics::rng::{par_blocks, par_map, RngStream};
use crate::numerics::sampling::{fill_gaussian, norm, sphere_point};
use crate::numerics::sphere::{sphere_quadrature, SphereGrid, SphereMode};
use crate::numerics::stats::MeanAcc;

/// Offsets `1/l` used to approach `s = n` from below.
pub const RICHARDSON_STEPS: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

fn check_dim(body: &dyn StarBody, n: usize) -> Result<()> {
    if body.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: body.dim(),
        });
    }
    Ok(())
}

/// Mean of `rho^q` against the grid weights, with infinite nodes dropped.
/// Returns the mean, the per-node values (finite ones only) and the number
/// of dropped nodes.
fn grid_power_mean(body: &dyn StarBody, grid: &SphereGrid, q: f64) -> Result<(f64, Vec<f64>, usize)> {
    check_dim(body, grid.dim)?;
    if grid.is_empty() {
        return Err(invalid("grid", "no nodes"));
    }
    let rho = par_map(grid.len(), |j| body.radial(&grid.nodes[j]));
    if let Some(r) = rho.iter().find(|r| r.is_nan() || **r < 0.0) {
        return Err(invalid("body", format!("radial function returned {r}")));
    }
    let infinite = rho.iter().filter(|r| r.is_infinite()).count();
    if infinite * 100 > grid.len() {
        return Err(Error::Unbounded {
            infinite,
            total: grid.len(),
        });
    }
    let mut sw = 0.0;
    let mut s = 0.0;
    let mut vals = Vec::with_capacity(grid.len() - infinite);
    for (r, w) in rho.iter().zip(&grid.weights) {
        if r.is_finite() {
            let v = r.powf(q);
            sw += w;
            s += w * v;
            vals.push(v);
        }
    }
    Ok((s / sw, vals, infinite))
}

/// `omega_n * sum_j w_j rho(u_j)^n` over the grid.
///
/// Deterministic grids report zero standard error; Monte Carlo grids report
/// the sample standard error.
pub fn volume_radial(body: &dyn StarBody, grid: &SphereGrid) -> Result<Estimate> {
    let n = grid.dim;
    let omega = unit_ball_volume(n)?;
    let (mean, vals, dropped) = grid_power_mean(body, grid, n as f64)?;
    let stderr = if grid.deterministic {
        0.0
    } else {
        omega * MeanAcc::from_slice(&vals).stderr()
    };
    let mut e = Estimate::new(omega * mean, stderr, 0.0, grid.len() as u64, "radial");
    e.dropped = dropped;
    Ok(e)
}

/// [`volume_radial`] on a deterministic grid of the given resolution, with
/// the quadrature error estimated by the half-resolution grid.
///
/// For `n >= 4` the grid is Monte Carlo and `stream` seeds it.
pub fn volume_radial_at(
    body: &dyn StarBody,
    resolution: usize,
    stream: Option<&RngStream>,
) -> Result<Estimate> {
    let n = body.dim();
    let fine = sphere_quadrature(n, resolution, SphereMode::Deterministic, stream)?;
    let mut e = volume_radial(body, &fine)?;
    if fine.deterministic {
        let coarse = sphere_quadrature(n, (resolution / 2).max(8), SphereMode::Deterministic, None)?;
        let c = volume_radial(body, &coarse)?;
        let dropped = e.dropped;
        e = Estimate::deterministic(e.value, (e.value - c.value).abs(), fine.len(), "radial");
        e.dropped = dropped;
    }
    if let Some(s) = stream {
        e.seed = Some(*s);
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianMode {
    /// Average `rho^s(xi) / b_{n,s}`.
    Raw,
    /// Average `rho^s(xi / |xi|)`, integrating out `|xi|` exactly.
    Conditional,
}

fn gaussian_draws<F>(n: usize, samples: usize, stream: &RngStream, f: F) -> MeanAcc
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let parts = par_blocks(stream, samples, |rng, a, b| {
        let mut acc = MeanAcc::default();
        let mut xi = vec![0.0; n];
        for _ in a..b {
            fill_gaussian(rng, &mut xi);
            acc.push(f(&xi));
        }
        acc
    });
    MeanAcc::merged(&parts)
}

/// Estimate of `int_{S^{n-1}} rho^s dsigma` from standard Gaussian vectors,
/// for `0 < s < n`.
pub fn volume_gaussian(
    body: &dyn StarBody,
    s: f64,
    samples: usize,
    stream: &RngStream,
    mode: GaussianMode,
) -> Result<Estimate> {
    let n = body.dim();
    let b = gaussian_neg_moment(n, s)?;
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 draws"));
    }
    let acc = match mode {
        GaussianMode::Raw => gaussian_draws(n, samples, stream, |xi| body.radial(xi).powf(s) / b),
        GaussianMode::Conditional => gaussian_draws(n, samples, stream, |xi| {
            let r = norm(xi);
            // rho is homogeneous of degree -1
            (r * body.radial(xi)).powf(s)
        }),
    };
    if !acc.mean.is_finite() {
        return Err(Error::Unbounded {
            infinite: 1,
            total: samples,
        });
    }
    let tag = match mode {
        GaussianMode::Raw => "gaussian-raw",
        GaussianMode::Conditional => "gaussian-moment",
    };
    Ok(Estimate::new(acc.mean, acc.stderr(), 0.0, samples as u64, tag).with_seed(*stream))
}

/// Weights of polynomial extrapolation to `h = 0` from values at `hs`.
fn extrapolation_weights(hs: &[f64]) -> Vec<f64> {
    (0..hs.len())
        .map(|l| {
            hs.iter()
                .enumerate()
                .filter(|(m, _)| *m != l)
                .map(|(_, hm)| hm / (hm - hs[l]))
                .product()
        })
        .collect()
}

/// `|K|` as the limit of `omega_n * int rho^s dsigma` as `s -> n`.
///
/// The sphere integral is evaluated at `s = n - 1/l`, `l in {2, 4, 8, 16}`,
/// on common Gaussian directions, and extrapolated to `s = n`; the
/// extrapolation is applied per direction so the standard error is exact.
pub fn gaussian_volume(body: &dyn StarBody, samples: usize, stream: &RngStream) -> Result<Estimate> {
    let n = body.dim();
    let omega = unit_ball_volume(n)?;
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 draws"));
    }
    let nf = n as f64;
    let c = extrapolation_weights(&RICHARDSON_STEPS);
    let acc = gaussian_draws(n, samples, stream, |xi| {
        let r = norm(xi) * body.radial(xi);
        if r.is_infinite() {
            return f64::INFINITY;
        }
        RICHARDSON_STEPS
            .iter()
            .zip(&c)
            .map(|(h, w)| w * r.powf(nf - h))
            .sum()
    });
    if !acc.mean.is_finite() {
        return Err(Error::Unbounded {
            infinite: 1,
            total: samples,
        });
    }
    Ok(Estimate::new(
        omega * acc.mean,
        omega * acc.stderr(),
        0.0,
        samples as u64,
        "gaussian",
    )
    .with_seed(*stream))
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(invalid("p", format!("need p > 0, got {p}")));
    }
    Ok(())
}

/// `c_{n,p} int exp(-rho^{-p}(K, x)) dx` in polar coordinates, with the
/// radial integral `rho(u)^n Gamma(n/p) / p` done in closed form.
pub fn volume_exponential(body: &dyn StarBody, p: f64, grid: &SphereGrid) -> Result<Estimate> {
    check_exponent(p)?;
    let n = grid.dim;
    let nf = n as f64;
    let (mean, _, dropped) = grid_power_mean(body, grid, nf)?;
    let surface = nf * unit_ball_volume(n)?;
    let radial_integral = (ln_gamma(nf / p) - p.ln()).exp();
    let value = ln_c_np(n, p).exp() * surface * radial_integral * mean;
    let mut e = Estimate::deterministic(value, 0.0, grid.len(), "exponential");
    e.dropped = dropped;
    Ok(e)
}

/// Largest radial value over a pilot grid.
fn pilot_max_radius(body: &dyn StarBody, stream: &RngStream) -> Result<f64> {
    let n = body.dim();
    let grid = sphere_quadrature(n, 64, SphereMode::Deterministic, Some(&stream.named("pilot")))?;
    let rho = par_map(grid.len(), |j| body.radial(&grid.nodes[j]));
    let m = rho
        .iter()
        .copied()
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    if !(m > 0.0) {
        return Err(invalid("body", "radial function vanishes on the pilot grid"));
    }
    Ok(m)
}

/// Direct Monte Carlo of `c_{n,p} int_{R^n} exp(-rho^{-p}(K, x)) dx`.
///
/// The proposal has density proportional to `exp(-(|x|/tau)^p)` with `tau`
/// slightly above the largest pilot radius, so the weights stay bounded.
pub fn volume_exponential_direct(
    body: &dyn StarBody,
    p: f64,
    samples: usize,
    stream: &RngStream,
) -> Result<Estimate> {
    check_exponent(p)?;
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 draws"));
    }
    let n = body.dim();
    let nf = n as f64;
    let tau = 1.05 * pilot_max_radius(body, stream)?;
    let gamma = Gamma::new(nf / p, 1.0).map_err(|e| invalid("p", e.to_string()))?;
    // c_{n,p} times the proposal normaliser tau^n omega_n Gamma(1 + n/p)
    let scale = unit_ball_volume(n)? * tau.powf(nf);
    let parts = par_blocks(stream, samples, |rng, a, b| {
        let mut acc = MeanAcc::default();
        for _ in a..b {
            let u = sphere_point(rng, n);
            let g: f64 = gamma.sample(rng);
            let r = tau * g.powf(1.0 / p);
            let x: Vec<f64> = u.iter().map(|v| r * v).collect();
            let rho = body.radial(&x);
            let expo = (r / tau).powf(p) - rho.powf(-p);
            acc.push(scale * expo.exp());
        }
        acc
    });
    let acc = MeanAcc::merged(&parts);
    Ok(Estimate::new(
        acc.mean,
        acc.stderr(),
        0.0,
        samples as u64,
        "exponential-direct",
    )
    .with_seed(*stream))
}

/// Settings shared by the registered estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumePlan {
    /// Sphere grid resolution for quadrature estimators.
    pub resolution: usize,
    /// Draws for Monte Carlo estimators.
    pub samples: usize,
    /// Exponent of the exponential integral.
    pub exponent: f64,
    pub stream: RngStream,
}

impl Default for VolumePlan {
    fn default() -> Self {
        Self {
            resolution: 256,
            samples: 100_000,
            exponent: 2.0,
            stream: RngStream::new(0, 0),
        }
    }
}

pub trait VolumeEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, body: &dyn StarBody, plan: &VolumePlan) -> Result<Estimate>;
}

struct RadialEstimator;
struct GaussianEstimator;
struct ExponentialEstimator;
struct DirectExponentialEstimator;

impl VolumeEstimator for RadialEstimator {
    fn name(&self) -> &'static str {
        "radial"
    }
    fn estimate(&self, body: &dyn StarBody, plan: &VolumePlan) -> Result<Estimate> {
        volume_radial_at(body, plan.resolution, Some(&plan.stream.named("radial")))
    }
}

impl VolumeEstimator for GaussianEstimator {
    fn name(&self) -> &'static str {
        "gaussian"
    }
    fn estimate(&self, body: &dyn StarBody, plan: &VolumePlan) -> Result<Estimate> {
        gaussian_volume(body, plan.samples, &plan.stream.named("gaussian"))
    }
}

impl VolumeEstimator for ExponentialEstimator {
    fn name(&self) -> &'static str {
        "exponential"
    }
    fn estimate(&self, body: &dyn StarBody, plan: &VolumePlan) -> Result<Estimate> {
        let s = plan.stream.named("exponential");
        let grid = sphere_quadrature(body.dim(), plan.resolution, SphereMode::Deterministic, Some(&s))?;
        volume_exponential(body, plan.exponent, &grid)
    }
}

impl VolumeEstimator for DirectExponentialEstimator {
    fn name(&self) -> &'static str {
        "exponential-direct"
    }
    fn estimate(&self, body: &dyn StarBody, plan: &VolumePlan) -> Result<Estimate> {
        volume_exponential_direct(
            body,
            plan.exponent,
            plan.samples,
            &plan.stream.named("exponential-direct"),
        )
    }
}

/// Volume estimators looked up by name.
pub struct EstimatorRegistry {
    entries: Vec<Box<dyn VolumeEstimator>>,
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        let mut r = Self { entries: Vec::new() };
        r.register(Box::new(RadialEstimator));
        r.register(Box::new(GaussianEstimator));
        r.register(Box::new(ExponentialEstimator));
        r.register(Box::new(DirectExponentialEstimator));
        r
    }
}

impl EstimatorRegistry {
    /// Add an estimator, replacing any with the same name.
    pub fn register(&mut self, e: Box<dyn VolumeEstimator>) {
        self.entries.retain(|x| x.name() != e.name());
        self.entries.push(e);
    }

    pub fn get(&self, name: &str) -> Result<&dyn VolumeEstimator> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
            .ok_or_else(|| {
                invalid(
                    "method",
                    format!("unknown volume method `{name}`; known: {}", self.names().join(", ")),
                )
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn estimate(&self, name: &str, body: &dyn StarBody, plan: &VolumePlan) -> Result<Estimate> {
        self.get(name)?.estimate(body, plan)
    }
}
