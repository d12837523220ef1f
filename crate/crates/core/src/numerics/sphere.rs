//! Quadrature grids for the normalised Haar measure on S^{n-1}.

use std::f64::consts::PI;

use super::quad::gauss_legendre;
use super::rng::RngStream;
use super::sampling::sphere_point;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereMode {
    Deterministic,
    MonteCarlo,
}

#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub deterministic: bool,
}

impl SphereGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(u, w)| w * f(u))
            .sum()
    }
}

/// Build a sphere grid.
///
/// * n = 2: `resolution` equally spaced angles, offset by half a step so no
///   node lies on a coordinate axis.
/// * n = 3: Gauss-Legendre in the height (`resolution / 2` nodes) times
///   `resolution` equally spaced azimuths.
/// * n >= 4 or Monte Carlo mode: `resolution` i.i.d. uniform points.
pub fn sphere_quadrature(
    n: usize,
    resolution: usize,
    mode: SphereMode,
    stream: Option<&RngStream>,
) -> Result<SphereGrid> {
    if n < 2 {
        return Err(invalid("n", "sphere grids need n >= 2"));
    }
    if resolution < 8 {
        return Err(invalid("resolution", "need at least 8 nodes"));
    }
    if mode == SphereMode::MonteCarlo || n >= 4 {
        let stream = stream.copied().unwrap_or_else(|| RngStream::new(0, 0x5f3e));
        let mut rng = stream.block_rng(0);
        let nodes: Vec<Vec<f64>> = (0..resolution).map(|_| sphere_point(&mut rng, n)).collect();
        let w = 1.0 / resolution as f64;
        return Ok(SphereGrid {
            dim: n,
            nodes,
            weights: vec![w; resolution],
            deterministic: false,
        });
    }
    if n == 2 {
        let k = resolution;
        let nodes = (0..k)
            .map(|j| {
                let th = 2.0 * PI * (j as f64 + 0.5) / k as f64;
                vec![th.cos(), th.sin()]
            })
            .collect();
        return Ok(SphereGrid {
            dim: 2,
            nodes,
            weights: vec![1.0 / k as f64; k],
            deterministic: true,
        });
    }
    let nz = (resolution / 2).max(4);
    let nphi = resolution;
    let (zs, wz) = gauss_legendre(nz);
    let mut nodes = Vec::with_capacity(nz * nphi);
    let mut weights = Vec::with_capacity(nz * nphi);
    for (z, wzi) in zs.iter().zip(&wz) {
        let r = (1.0 - z * z).sqrt();
        for j in 0..nphi {
            let ph = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
            let mut u = [r * ph.cos(), r * ph.sin(), *z];
            let s = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            u.iter_mut().for_each(|v| *v /= s);
            nodes.push(u.to_vec());
            weights.push(wzi / 2.0 / nphi as f64);
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(SphereGrid {
        dim: 3,
        nodes,
        weights,
        deterministic: true,
    })
}
