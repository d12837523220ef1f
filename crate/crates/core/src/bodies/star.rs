//! Star bodies given by radial functions.

use std::sync::Arc;

use super::support::SupportBody;
use crate::error::{invalid, Result};
use crate::numerics::sampling::{dot, norm};

/// A star-shaped set in `R^n` described by `x -> rho(K, x)`.
///
/// `radial` must be homogeneous of degree -1 and may return `+inf` on a
/// null set of directions.
pub trait StarBody: Send + Sync {
    fn dim(&self) -> usize;
    fn radial(&self, x: &[f64]) -> f64;
}

impl<T: StarBody + ?Sized> StarBody for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn radial(&self, x: &[f64]) -> f64 {
        (**self).radial(x)
    }
}

impl<T: StarBody + ?Sized> StarBody for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn radial(&self, x: &[f64]) -> f64 {
        (**self).radial(x)
    }
}

impl<T: StarBody + ?Sized> StarBody for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn radial(&self, x: &[f64]) -> f64 {
        (**self).radial(x)
    }
}

/// Euclidean ball `c + r B_2^n` containing the origin in its interior.
#[derive(Debug, Clone, PartialEq)]
pub struct BallBody {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallBody {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid("center", "dimension must be at least 1"));
        }
        if !(radius > norm(&center)) || !radius.is_finite() {
            return Err(invalid("radius", "ball must contain the origin in its interior"));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(n: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; n], radius)
    }
}

impl StarBody for BallBody {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn radial(&self, x: &[f64]) -> f64 {
        let len = norm(x);
        let cv = dot(&self.center, x) / len;
        let cc = dot(&self.center, &self.center);
        (cv + (self.radius * self.radius - cc + cv * cv).sqrt()) / len
    }
}

/// `C°` for a support body `C`: `rho = 1 / h(C, .)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarBody(pub SupportBody);

impl StarBody for PolarBody {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn radial(&self, x: &[f64]) -> f64 {
        1.0 / self.0.h(x)
    }
}

/// Star body from a closure evaluated on unit directions; homogeneity is
/// supplied by the wrapper.
pub struct FnBody<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnBody<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> StarBody for FnBody<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn radial(&self, x: &[f64]) -> f64 {
        let len = norm(x);
        if (len - 1.0).abs() < 1e-15 {
            return (self.f)(x);
        }
        let u: Vec<f64> = x.iter().map(|v| v / len).collect();
        (self.f)(&u) / len
    }
}
