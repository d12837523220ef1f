//! Gaussian, spherical and positive-stable samplers.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use std::f64::consts::PI;

use crate::error::{invalid, Result};

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn fill_gaussian<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}

/// Uniform point on the unit sphere S^{n-1}.
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut g = gaussian_vec(rng, n);
        let r = norm(&g);
        if r > 1e-300 {
            g.iter_mut().for_each(|v| *v /= r);
            return g;
        }
    }
}

/// Uniform point in the unit ball B_2^n.
pub fn ball_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut x = sphere_point(rng, n);
    let r = rng.gen::<f64>().powf(1.0 / n as f64);
    x.iter_mut().for_each(|v| *v *= r);
    x
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Kanter's function `A(u)` for the positive stable representation.
fn kanter_a(alpha: f64, u: f64) -> f64 {
    let a = (alpha * u).sin().powf(alpha) * ((1.0 - alpha) * u).sin().powf(1.0 - alpha) / u.sin();
    a.powf(1.0 / (1.0 - alpha))
}

/// Exact draw from the positive stable law with Laplace transform
/// `exp(-t^alpha)`, via Kanter's representation.
pub fn positive_stable<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    loop {
        let u = PI * open_unit(rng);
        let e: f64 = Exp1.sample(rng);
        let w = (kanter_a(alpha, u) / e).powf((1.0 - alpha) / alpha);
        if w > 0.0 && w.is_finite() {
            return w;
        }
    }
}

pub fn sample_positive_stable<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("need 0 < alpha < 1, got {alpha}")));
    }
    Ok(positive_stable(rng, alpha))
}

/// A stable draw paired with the importance weight that tilts the stable
/// law by `s^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedStableDraw {
    pub w: f64,
    pub importance_weight: f64,
}

/// Draw from the `p/2`-stable law with importance weight `w^{-1/2}`;
/// self-normalised averages then target the density `~ s^{-1/2} g_{p/2}(s)`.
/// At `p = 1` the target is the law of `1/(4E)`, `E` standard exponential.
pub fn sample_tilted_weight<R: Rng + ?Sized>(rng: &mut R, p: f64) -> Result<TiltedStableDraw> {
    if !(p > 0.0 && p < 2.0) {
        return Err(invalid("p", format!("need 0 < p < 2, got {p}")));
    }
    let w = positive_stable(rng, p / 2.0);
    Ok(TiltedStableDraw {
        w,
        importance_weight: 1.0 / w.sqrt(),
    })
}
