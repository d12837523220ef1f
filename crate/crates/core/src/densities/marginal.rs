//! One-dimensional marginals `f_u(t) = int_{<x,u> = t} f`.

use statrs::function::gamma::gamma_lr;
use std::f64::consts::PI;

use super::profile::{pos_pow, RadialProfile};
use crate::numerics::constants::ln_unit_ball_volume;
use crate::numerics::quad::integrate_pieces;

#[derive(Debug, Clone)]
pub(crate) enum Marginal1D {
    /// `coef * (r^2 - (t - t0)^2)_+^{(n-1)/2}`
    Ball { t0: f64, radius: f64, expo: f64, coef: f64 },
    /// Convolution of centred uniforms of half-widths `b`.
    Cube { b: Vec<f64>, ln_scale: f64 },
    Radial { profile: RadialProfile, dim: usize },
    Gaussian { sd: f64 },
    TruncGaussian { sigma: f64, radius: f64, dim: usize, mass: f64 },
    Mixture(Vec<(f64, Density1D)>),
    /// Linear interpolation on an equispaced table over `[lo, hi]`.
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Density1D {
    pub(crate) kind: Marginal1D,
    pub lo: f64,
    pub hi: f64,
    pub breaks: Vec<f64>,
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

impl Density1D {
    pub(crate) fn ball(t0: f64, radius: f64, n: usize) -> Self {
        let expo = (n as f64 - 1.0) / 2.0;
        let coef = if n == 1 {
            1.0 / (2.0 * radius)
        } else {
            (ln_unit_ball_volume(n - 1) - ln_unit_ball_volume(n) - n as f64 * radius.ln()).exp()
        };
        Self {
            kind: Marginal1D::Ball {
                t0,
                radius,
                expo,
                coef,
            },
            lo: t0 - radius,
            hi: t0 + radius,
            breaks: vec![t0],
        }
    }

    /// Marginal of the uniform density on `[-a, a]^n` along unit `u`.
    pub(crate) fn cube(a: f64, u: &[f64]) -> Self {
        let bmax = u.iter().fold(0.0f64, |m, v| m.max(v.abs())) * a;
        let b: Vec<f64> = u
            .iter()
            .map(|v| v.abs() * a)
            .filter(|&bi| bi > 1e-9 * bmax)
            .collect();
        let k = b.len();
        let ln_scale = -b.iter().map(|bi| (2.0 * bi).ln()).sum::<f64>() - ln_factorial(k - 1);
        let mut breaks = Vec::with_capacity(1 << k);
        for mask in 0..(1usize << k) {
            let s: f64 = (0..k)
                .map(|i| if mask >> i & 1 == 1 { b[i] } else { -b[i] })
                .sum();
            breaks.push(s);
        }
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.dedup();
        let hi = b.iter().sum::<f64>();
        Self {
            kind: Marginal1D::Cube { b, ln_scale },
            lo: -hi,
            hi,
            breaks,
        }
    }

    pub(crate) fn radial(profile: RadialProfile, dim: usize) -> Self {
        let mut breaks: Vec<f64> = profile.radii.iter().flat_map(|&r| [-r, r]).collect();
        breaks.push(0.0);
        let r = profile.outer();
        Self {
            kind: Marginal1D::Radial { profile, dim },
            lo: -r,
            hi: r,
            breaks,
        }
    }

    pub(crate) fn gaussian(sd: f64) -> Self {
        Self {
            kind: Marginal1D::Gaussian { sd },
            lo: -14.0 * sd,
            hi: 14.0 * sd,
            breaks: vec![0.0],
        }
    }

    pub(crate) fn trunc_gaussian(sigma: f64, radius: f64, dim: usize, mass: f64) -> Self {
        Self {
            kind: Marginal1D::TruncGaussian {
                sigma,
                radius,
                dim,
                mass,
            },
            lo: -radius,
            hi: radius,
            breaks: vec![0.0],
        }
    }

    pub(crate) fn mixture(parts: Vec<(f64, Density1D)>) -> Self {
        let lo = parts.iter().map(|p| p.1.lo).fold(f64::INFINITY, f64::min);
        let hi = parts.iter().map(|p| p.1.hi).fold(f64::NEG_INFINITY, f64::max);
        let mut breaks: Vec<f64> = parts
            .iter()
            .flat_map(|p| {
                let mut b = p.1.breaks.clone();
                b.push(p.1.lo);
                b.push(p.1.hi);
                b
            })
            .collect();
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.dedup();
        Self {
            kind: Marginal1D::Mixture(parts),
            lo,
            hi,
            breaks,
        }
    }

    /// Tabulated marginal, renormalised to unit mass by the trapezoid rule.
    pub(crate) fn table(lo: f64, hi: f64, mut values: Vec<f64>) -> Self {
        let h = (hi - lo) / (values.len() - 1) as f64;
        let m: f64 = h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[values.len() - 1]));
        if m > 0.0 {
            values.iter_mut().for_each(|v| *v /= m);
        }
        let breaks = (0..values.len()).map(|i| lo + i as f64 * h).collect();
        Self {
            kind: Marginal1D::Table { values },
            lo,
            hi,
            breaks,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Marginal1D::Ball {
                t0,
                radius,
                expo,
                coef,
            } => {
                let d = t - t0;
                coef * pos_pow(radius * radius - d * d, *expo)
            }
            Marginal1D::Cube { b, ln_scale } => {
                let k = b.len();
                if t <= -self.hi || t >= self.hi {
                    return 0.0;
                }
                let mut s = 0.0;
                for mask in 0..(1usize << k) {
                    let mut shift = 0.0;
                    let mut sign = 1.0;
                    for (i, bi) in b.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            shift += bi;
                        } else {
                            shift -= bi;
                            sign = -sign;
                        }
                    }
                    s += sign * pos_pow(t + shift, (k - 1) as f64);
                }
                (s * ln_scale.exp()).max(0.0)
            }
            Marginal1D::Radial { profile, dim } => {
                let n = *dim;
                let e = (n as f64 - 1.0) / 2.0;
                let w = if n == 1 {
                    1.0
                } else {
                    ln_unit_ball_volume(n - 1).exp()
                };
                let t2 = t * t;
                let mut s = 0.0;
                for k in 0..profile.radii.len() {
                    let ro = profile.radii[k];
                    let ri = profile.inner(k);
                    s += profile.values[k] * (pos_pow(ro * ro - t2, e) - pos_pow(ri * ri - t2, e));
                }
                w * s
            }
            Marginal1D::Gaussian { sd } => {
                (-0.5 * (t / sd).powi(2)).exp() / (sd * (2.0 * PI).sqrt())
            }
            Marginal1D::TruncGaussian {
                sigma,
                radius,
                dim,
                mass,
            } => {
                if t.abs() >= *radius {
                    return 0.0;
                }
                let base = (-0.5 * (t / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt());
                let slice = if *dim == 1 {
                    1.0
                } else {
                    gamma_lr(
                        (*dim as f64 - 1.0) / 2.0,
                        (radius * radius - t * t) / (2.0 * sigma * sigma),
                    )
                };
                base * slice / mass
            }
            Marginal1D::Mixture(parts) => parts.iter().map(|(w, d)| w * d.eval(t)).sum(),
            Marginal1D::Table { values } => {
                if t <= self.lo || t >= self.hi {
                    return 0.0;
                }
                let h = (self.hi - self.lo) / (values.len() - 1) as f64;
                let r = (t - self.lo) / h;
                let i = (r as usize).min(values.len() - 2);
                let fr = r - i as f64;
                values[i] * (1.0 - fr) + values[i + 1] * fr
            }
        }
    }

    pub fn integral(&self) -> f64 {
        integrate_pieces(|t| self.eval(t), self.lo, self.hi, &self.breaks).0
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        if t >= self.hi {
            return 1.0;
        }
        integrate_pieces(|s| self.eval(s), self.lo, t, &self.breaks).0
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn sup(&self) -> f64 {
        let mut pts = self.breaks.clone();
        let m = 400;
        pts.extend((0..=m).map(|i| self.lo + (self.hi - self.lo) * i as f64 / m as f64));
        pts.iter().map(|&t| self.eval(t)).fold(0.0, f64::max)
    }
}
