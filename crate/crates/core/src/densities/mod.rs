//! Bounded probability densities on R^n: evaluation, sampling, marginals,
//! level sets, and the rearrangement-type operations in [`ops`].

pub mod grid;
pub mod marginal;
pub mod ops;
pub mod profile;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;
use std::f64::consts::PI;
use std::sync::Arc;

pub use grid::GridData;
pub use marginal::Density1D;
pub use ops::{ball_flatten, level_set_volume, lp_distance, rearrange, truncate_normalize};
pub use profile::RadialProfile;

use crate::error::{invalid, Error, Result};
use crate::numerics::constants::ln_unit_ball_volume;
use crate::numerics::sampling::{ball_point, dot, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    UniformBall,
    ShiftedUniformBall,
    UniformCube,
    UniformAnnulus,
    Gaussian,
    TruncatedGaussian,
    RadialStep,
    Mixture,
    CustomGrid,
    Truncated,
}

#[derive(Debug, Clone)]
pub(crate) enum Family {
    Ball { center: Vec<f64>, radius: f64 },
    Cube { half_width: f64 },
    Radial(RadialProfile),
    Gaussian { sigmas: Vec<f64> },
    TruncGaussian { sigma: f64, radius: f64, mass: f64 },
    Mixture { weights: Vec<f64>, components: Vec<Density> },
    Grid { data: Arc<GridData>, cumulative: Arc<Vec<f64>> },
    Truncated { base: Box<Density>, radius: f64, mass: f64 },
}

#[derive(Debug, Clone)]
pub struct Density {
    dim: usize,
    pub(crate) family: Family,
    tag: FamilyTag,
    sup_norm: f64,
    support_radius: f64,
}

fn one() -> f64 {
    1.0
}

/// Serializable description of a density, as used in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    UniformBall {
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    UniformCube {
        dim: usize,
        #[serde(default = "one")]
        half_width: f64,
    },
    UniformAnnulus {
        dim: usize,
        inner: f64,
        outer: f64,
    },
    Gaussian {
        dim: usize,
        #[serde(default)]
        sigma: Option<f64>,
        #[serde(default)]
        sigmas: Option<Vec<f64>>,
    },
    TruncatedGaussian {
        dim: usize,
        #[serde(default = "one")]
        sigma: f64,
        radius: f64,
    },
    RadialStep {
        dim: usize,
        radii: Vec<f64>,
        values: Vec<f64>,
    },
    Mixture {
        weights: Vec<f64>,
        components: Vec<DensitySpec>,
    },
    Grid {
        path: String,
    },
    GridInline {
        lo: Vec<f64>,
        hi: Vec<f64>,
        resolution: Vec<usize>,
        values: Vec<f64>,
    },
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(invalid("dim", "dimension must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_pos(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

pub fn make_density(spec: &DensitySpec) -> Result<Density> {
    match spec {
        DensitySpec::UniformBall {
            dim,
            radius,
            center,
        } => {
            check_dim(*dim)?;
            check_pos("radius", *radius)?;
            match center {
                Some(c) if c.iter().any(|v| *v != 0.0) => {
                    if c.len() != *dim {
                        return Err(invalid("center", format!("must have {dim} entries")));
                    }
                    Ok(Density::shifted_ball(c.clone(), *radius))
                }
                _ => Ok(Density::ball(*dim, *radius)),
            }
        }
        DensitySpec::UniformCube { dim, half_width } => {
            check_dim(*dim)?;
            check_pos("half_width", *half_width)?;
            Ok(Density::cube(*dim, *half_width))
        }
        DensitySpec::UniformAnnulus { dim, inner, outer } => {
            check_dim(*dim)?;
            check_pos("inner", *inner)?;
            if !(outer > inner) || !outer.is_finite() {
                return Err(invalid("outer", "must exceed inner"));
            }
            Density::annulus(*dim, *inner, *outer)
        }
        DensitySpec::Gaussian { dim, sigma, sigmas } => {
            check_dim(*dim)?;
            let s = match (sigma, sigmas) {
                (_, Some(v)) => {
                    if v.len() != *dim {
                        return Err(invalid("sigmas", format!("must have {dim} entries")));
                    }
                    v.clone()
                }
                (Some(s), None) => vec![*s; *dim],
                (None, None) => vec![1.0; *dim],
            };
            for v in &s {
                check_pos("sigmas", *v)?;
            }
            Ok(Density::gaussian(s))
        }
        DensitySpec::TruncatedGaussian { dim, sigma, radius } => {
            check_dim(*dim)?;
            check_pos("sigma", *sigma)?;
            check_pos("radius", *radius)?;
            Ok(Density::truncated_gaussian(*dim, *sigma, *radius))
        }
        DensitySpec::RadialStep { dim, radii, values } => {
            check_dim(*dim)?;
            Density::radial_step(*dim, RadialProfile::new(radii.clone(), values.clone())?)
        }
        DensitySpec::Mixture {
            weights,
            components,
        } => {
            let comps = components
                .iter()
                .map(make_density)
                .collect::<Result<Vec<_>>>()?;
            Density::mixture(weights.clone(), comps)
        }
        DensitySpec::Grid { path } => {
            Density::from_grid(grid::load_grid(std::path::Path::new(path))?)
        }
        DensitySpec::GridInline {
            lo,
            hi,
            resolution,
            values,
        } => Density::from_grid(
            GridData::new(lo.clone(), hi.clone(), resolution.clone(), values.clone())?
                .normalized()?,
        ),
    }
}

impl Density {
    pub fn ball(n: usize, radius: f64) -> Self {
        Self {
            dim: n,
            family: Family::Ball {
                center: vec![0.0; n],
                radius,
            },
            tag: FamilyTag::UniformBall,
            sup_norm: (-ln_unit_ball_volume(n) - n as f64 * radius.ln()).exp(),
            support_radius: radius,
        }
    }

    pub fn shifted_ball(center: Vec<f64>, radius: f64) -> Self {
        let n = center.len();
        let c = norm(&center);
        Self {
            dim: n,
            family: Family::Ball { center, radius },
            tag: FamilyTag::ShiftedUniformBall,
            sup_norm: (-ln_unit_ball_volume(n) - n as f64 * radius.ln()).exp(),
            support_radius: c + radius,
        }
    }

    pub fn cube(n: usize, half_width: f64) -> Self {
        Self {
            dim: n,
            family: Family::Cube { half_width },
            tag: FamilyTag::UniformCube,
            sup_norm: (2.0 * half_width).powi(-(n as i32)),
            support_radius: half_width * (n as f64).sqrt(),
        }
    }

    pub fn annulus(n: usize, inner: f64, outer: f64) -> Result<Self> {
        let mut d = Self::radial_step(n, RadialProfile::new(vec![inner, outer], vec![0.0, 1.0])?)?;
        d.tag = FamilyTag::UniformAnnulus;
        Ok(d)
    }

    /// Radial step density; the profile is rescaled to unit mass.
    pub fn radial_step(n: usize, profile: RadialProfile) -> Result<Self> {
        let m = profile.mass(n);
        if !(m > 0.0) {
            return Err(invalid("values", "radial profile has zero mass"));
        }
        let profile = profile.scaled(1.0 / m);
        Ok(Self {
            dim: n,
            sup_norm: profile.max_value(),
            support_radius: profile.outer(),
            family: Family::Radial(profile),
            tag: FamilyTag::RadialStep,
        })
    }

    pub fn gaussian(sigmas: Vec<f64>) -> Self {
        let n = sigmas.len();
        let ln_det: f64 = sigmas.iter().map(|s| s.ln()).sum();
        Self {
            dim: n,
            sup_norm: (-(n as f64) / 2.0 * (2.0 * PI).ln() - ln_det).exp(),
            support_radius: f64::INFINITY,
            family: Family::Gaussian { sigmas },
            tag: FamilyTag::Gaussian,
        }
    }

    pub fn truncated_gaussian(n: usize, sigma: f64, radius: f64) -> Self {
        let mass = gamma_lr(n as f64 / 2.0, radius * radius / (2.0 * sigma * sigma));
        let peak = (-(n as f64) / 2.0 * (2.0 * PI).ln() - n as f64 * sigma.ln()).exp();
        Self {
            dim: n,
            sup_norm: peak / mass,
            support_radius: radius,
            family: Family::TruncGaussian {
                sigma,
                radius,
                mass,
            },
            tag: FamilyTag::TruncatedGaussian,
        }
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<Density>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(invalid("weights", "need one weight per component"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("weights", "weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("weights", format!("weights must sum to 1, got {total}")));
        }
        let n = components[0].dim;
        if components.iter().any(|c| c.dim != n) {
            return Err(invalid("components", "components must share one dimension"));
        }
        let support_radius = components
            .iter()
            .map(|c| c.support_radius)
            .fold(0.0, f64::max);
        let mut d = Self {
            dim: n,
            family: Family::Mixture {
                weights,
                components,
            },
            tag: FamilyTag::Mixture,
            sup_norm: 0.0,
            support_radius,
        };
        d.sup_norm = d.scan_sup();
        Ok(d)
    }

    pub fn from_grid(data: GridData) -> Result<Self> {
        let data = if (data.mass() - 1.0).abs() > 1e-9 {
            data.normalized()?
        } else {
            data
        };
        let cumulative = data.cumulative();
        Ok(Self {
            dim: data.dim,
            sup_norm: data.max_value(),
            support_radius: data.support_radius(),
            family: Family::Grid {
                data: Arc::new(data),
                cumulative: Arc::new(cumulative),
            },
            tag: FamilyTag::CustomGrid,
        })
    }

    pub(crate) fn truncated_generic(base: Density, radius: f64, mass: f64) -> Self {
        Self {
            dim: base.dim,
            sup_norm: base.sup_norm / mass,
            support_radius: radius.min(base.support_radius),
            family: Family::Truncated {
                base: Box::new(base),
                radius,
                mass,
            },
            tag: FamilyTag::Truncated,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> FamilyTag {
        self.tag
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn is_compact(&self) -> bool {
        self.support_radius.is_finite()
    }

    /// Radial profile `r -> f(r e_1)` if the density is rotation invariant.
    pub fn radial_function(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        match &self.family {
            Family::Ball { center, radius } if center.iter().all(|v| *v == 0.0) => {
                let (r, v) = (*radius, self.sup_norm);
                Some(Box::new(move |s| if s < r { v } else { 0.0 }))
            }
            Family::Radial(p) => Some(Box::new(move |s| p.eval(s))),
            Family::Gaussian { sigmas } if sigmas.iter().all(|s| *s == sigmas[0]) => {
                let (s0, v) = (sigmas[0], self.sup_norm);
                Some(Box::new(move |s| v * (-0.5 * (s / s0).powi(2)).exp()))
            }
            Family::TruncGaussian { sigma, radius, .. } => {
                let (s0, r, v) = (*sigma, *radius, self.sup_norm);
                Some(Box::new(move |s| {
                    if s < r {
                        v * (-0.5 * (s / s0).powi(2)).exp()
                    } else {
                        0.0
                    }
                }))
            }
            _ => None,
        }
    }

    /// Radii where the radial profile is discontinuous or kinked.
    pub(crate) fn radial_breaks(&self) -> Vec<f64> {
        match &self.family {
            Family::Ball { radius, .. } => vec![*radius],
            Family::Radial(p) => p.radii.clone(),
            Family::TruncGaussian { radius, .. } => vec![*radius],
            _ => vec![],
        }
    }

    pub fn is_radial(&self) -> bool {
        self.radial_function().is_some()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.family {
            Family::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                if d2 < radius * radius {
                    self.sup_norm
                } else {
                    0.0
                }
            }
            Family::Cube { half_width } => {
                if x.iter().all(|v| v.abs() < *half_width) {
                    self.sup_norm
                } else {
                    0.0
                }
            }
            Family::Radial(p) => p.eval(norm(x)),
            Family::Gaussian { sigmas } => {
                let q: f64 = x.iter().zip(sigmas).map(|(v, s)| (v / s).powi(2)).sum();
                self.sup_norm * (-0.5 * q).exp()
            }
            Family::TruncGaussian { sigma, radius, .. } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 < radius * radius {
                    self.sup_norm * (-0.5 * r2 / (sigma * sigma)).exp()
                } else {
                    0.0
                }
            }
            Family::Mixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, c)| w * c.eval(x))
                .sum(),
            Family::Grid { data, .. } => data.eval(x),
            Family::Truncated { base, radius, mass } => {
                if norm(x) < *radius {
                    base.eval(x) / mass
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.dim;
        match &self.family {
            Family::Ball { center, radius } => {
                let mut x = ball_point(rng, n);
                x.iter_mut()
                    .zip(center)
                    .for_each(|(v, c)| *v = c + radius * *v);
                x
            }
            Family::Cube { half_width } => (0..n)
                .map(|_| half_width * (2.0 * rng.gen::<f64>() - 1.0))
                .collect(),
            Family::Radial(p) => {
                let masses: Vec<f64> = (0..p.radii.len())
                    .map(|k| p.values[k] * p.shell_volume(k, n))
                    .collect();
                let total: f64 = masses.iter().sum();
                let mut target = rng.gen::<f64>() * total;
                let mut k = masses.len() - 1;
                for (i, m) in masses.iter().enumerate() {
                    if target < *m {
                        k = i;
                        break;
                    }
                    target -= m;
                }
                let ri = p.inner(k).powi(n as i32);
                let ro = p.radii[k].powi(n as i32);
                let r = (ri + rng.gen::<f64>() * (ro - ri)).powf(1.0 / n as f64);
                let mut x = crate::numerics::sampling::sphere_point(rng, n);
                x.iter_mut().for_each(|v| *v *= r);
                x
            }
            Family::Gaussian { sigmas } => sigmas
                .iter()
                .map(|s| s * { let z: f64 = StandardNormal.sample(rng); z })
                .collect(),
            Family::TruncGaussian {
                sigma,
                radius,
                mass,
            } => loop {
                if *mass > 0.1 {
                    let x: Vec<f64> = (0..n)
                        .map(|_| sigma * { let z: f64 = StandardNormal.sample(rng); z })
                        .collect();
                    if norm(&x) < *radius {
                        return x;
                    }
                } else {
                    let mut x = ball_point(rng, n);
                    x.iter_mut().for_each(|v| *v *= radius);
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    if rng.gen::<f64>() < (-0.5 * r2 / (sigma * sigma)).exp() {
                        return x;
                    }
                }
            },
            Family::Mixture {
                weights,
                components,
            } => {
                let mut target = rng.gen::<f64>();
                for (w, c) in weights.iter().zip(components) {
                    if target < *w {
                        return c.sample(rng);
                    }
                    target -= w;
                }
                components.last().unwrap().sample(rng)
            }
            Family::Grid { data, cumulative } => data.sample(rng, cumulative),
            Family::Truncated { base, radius, .. } => loop {
                let x = base.sample(rng);
                if norm(&x) < *radius {
                    return x;
                }
            },
        }
    }

    /// Write a draw into `out` (length `dim`), avoiding an allocation for the
    /// common uniform families.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.family {
            Family::Cube { half_width } => {
                for v in out.iter_mut() {
                    *v = half_width * (2.0 * rng.gen::<f64>() - 1.0);
                }
            }
            Family::Ball { center, radius } if self.dim == 2 => {
                // rejection from the bounding square
                loop {
                    let a = 2.0 * rng.gen::<f64>() - 1.0;
                    let b = 2.0 * rng.gen::<f64>() - 1.0;
                    if a * a + b * b < 1.0 {
                        out[0] = center[0] + radius * a;
                        out[1] = center[1] + radius * b;
                        return;
                    }
                }
            }
            _ => out.copy_from_slice(&self.sample(rng)),
        }
    }

    /// The marginal density along `u` (normalised internally).
    pub fn marginal(&self, u: &[f64]) -> Result<Density1D> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        let un = norm(u);
        if !(un > 0.0) {
            return Err(invalid("u", "direction must be nonzero"));
        }
        let u: Vec<f64> = u.iter().map(|v| v / un).collect();
        let n = self.dim;
        Ok(match &self.family {
            Family::Ball { center, radius } => Density1D::ball(dot(center, &u), *radius, n),
            Family::Cube { half_width } => Density1D::cube(*half_width, &u),
            Family::Radial(p) => Density1D::radial(p.clone(), n),
            Family::Gaussian { sigmas } => {
                let var: f64 = sigmas.iter().zip(&u).map(|(s, v)| (s * v).powi(2)).sum();
                Density1D::gaussian(var.sqrt())
            }
            Family::TruncGaussian {
                sigma,
                radius,
                mass,
            } => Density1D::trunc_gaussian(*sigma, *radius, n, *mass),
            Family::Mixture {
                weights,
                components,
            } => Density1D::mixture(
                weights
                    .iter()
                    .zip(components)
                    .map(|(w, c)| c.marginal(&u).map(|m| (*w, m)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            Family::Grid { .. } | Family::Truncated { .. } => self.slice_marginal(&u)?,
        })
    }

    /// Tabulated marginal by slice quadrature (midpoint rule, 128 nodes per
    /// slice direction).
    fn slice_marginal(&self, u: &[f64]) -> Result<Density1D> {
        let n = self.dim;
        if !self.is_compact() {
            return Err(Error::Unsupported(
                "slice marginals need a compactly supported density".into(),
            ));
        }
        if !(2..=3).contains(&n) {
            return Err(Error::Unsupported("slice marginals are implemented for n = 2, 3".into()));
        }
        let r = self.support_radius * (1.0 + 1e-9);
        let basis = orthonormal_complement(u);
        let m = 128usize;
        let h = 2.0 * r / m as f64;
        let nt = 401usize;
        let values: Vec<f64> = (0..nt)
            .map(|i| {
                let t = -r + 2.0 * r * i as f64 / (nt - 1) as f64;
                let mut x = vec![0.0; n];
                let mut acc = 0.0;
                if n == 2 {
                    for a in 0..m {
                        let s = -r + (a as f64 + 0.5) * h;
                        for k in 0..2 {
                            x[k] = t * u[k] + s * basis[0][k];
                        }
                        acc += self.eval(&x);
                    }
                    acc * h
                } else {
                    for a in 0..m {
                        let s1 = -r + (a as f64 + 0.5) * h;
                        for b in 0..m {
                            let s2 = -r + (b as f64 + 0.5) * h;
                            for k in 0..3 {
                                x[k] = t * u[k] + s1 * basis[0][k] + s2 * basis[1][k];
                            }
                            acc += self.eval(&x);
                        }
                    }
                    acc * h * h
                }
            })
            .collect();
        Ok(Density1D::table(-r, r, values))
    }

    /// Maximum of the evaluator over a fine lattice and the component centres.
    fn scan_sup(&self) -> f64 {
        let n = self.dim;
        let mut best: f64 = 0.0;
        if let Family::Mixture { components, .. } = &self.family {
            for c in components {
                if let Family::Ball { center, .. } = &c.family {
                    best = best.max(self.eval(center));
                }
            }
            best = best.max(self.eval(&vec![0.0; n]));
        }
        let r = if self.support_radius.is_finite() {
            self.support_radius
        } else {
            8.0
        };
        let m: usize = match n {
            1 => 4001,
            2 => 257,
            3 => 49,
            _ => 13,
        };
        let total = m.pow(n as u32);
        let mut x = vec![0.0; n];
        for flat in 0..total {
            let mut f = flat;
            for k in 0..n {
                x[k] = -r + 2.0 * r * (f % m) as f64 / (m - 1) as f64;
                f /= m;
            }
            best = best.max(self.eval(&x));
        }
        best
    }

    /// Star body `K` when the density is uniform on `K` and `K` contains the
    /// origin in its interior.
    pub fn uniform_support(&self) -> Option<UniformSupport> {
        match &self.family {
            Family::Ball { center, radius } if norm(center) < *radius => Some(UniformSupport::Ball {
                center: center.clone(),
                radius: *radius,
            }),
            Family::Cube { half_width } => Some(UniformSupport::Cube {
                dim: self.dim,
                half_width: *half_width,
            }),
            _ => None,
        }
    }
}

/// Sets carrying an indicator-type density.
#[derive(Debug, Clone, PartialEq)]
pub enum UniformSupport {
    Ball { center: Vec<f64>, radius: f64 },
    Cube { dim: usize, half_width: f64 },
}

/// Orthonormal basis of `u^perp` (`u` unit, n = 2 or 3).
pub fn orthonormal_complement(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let mut v: Vec<f64> = e.iter().zip(u).map(|(a, b)| a - dot(&e, u) * b).collect();
        for w in &out {
            let c = dot(&v, w);
            v.iter_mut().zip(w).for_each(|(a, b)| *a -= c * b);
        }
        let l = norm(&v);
        if l > 0.3 {
            v.iter_mut().for_each(|a| *a /= l);
            out.push(v);
        }
        if out.len() == n - 1 {
            break;
        }
    }
    out
}
