//! Central-section integrals against the volume bound.

use crate::bodies::{BallBody, FnBody, StarBody};
use crate::densities::{orthonormal_complement, Density, UniformSupport};
use crate::error::{Error, Result};
use crate::experiments::report::ComparisonReport;
use crate::numerics::constants::unit_ball_volume;
use crate::numerics::sphere::{sphere_quadrature, SphereMode};
use crate::volume::Estimate;

/// `(int |K cap u^perp|^n du, (omega_{n-1}^n / omega_n^{n-1}) |K|^{n-1})`.
fn sides(body: &dyn StarBody, resolution: usize) -> Result<(f64, f64, usize)> {
    let n = body.dim();
    let grid = sphere_quadrature(n, resolution, SphereMode::Deterministic, None)?;
    let omega_n = unit_ball_volume(n)?;
    let omega_m = unit_ball_volume(n - 1)?;
    let nf = n as f64;
    let mut lhs = 0.0;
    let mut vol = 0.0;
    for (u, w) in grid.nodes.iter().zip(&grid.weights) {
        vol += w * body.radial(u).powf(nf);
        let section = if n == 2 {
            let v = [-u[1], u[0]];
            body.radial(&v) + body.radial(&[u[1], -u[0]])
        } else {
            let basis = orthonormal_complement(u);
            let k = resolution;
            let mut s = 0.0;
            for j in 0..k {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
                let x: Vec<f64> = (0..3)
                    .map(|i| th.cos() * basis[0][i] + th.sin() * basis[1][i])
                    .collect();
                s += body.radial(&x).powi(2);
            }
            std::f64::consts::PI * s / k as f64
        };
        lhs += w * section.powf(nf);
    }
    let vol = omega_n * vol;
    let rhs = omega_m.powf(nf) / omega_n.powf(nf - 1.0) * vol.powf(nf - 1.0);
    Ok((lhs, rhs, grid.len()))
}

/// Busemann comparison for a star body in dimension 2 or 3, by quadrature at
/// `resolution` with errors from the half-resolution grid.
pub fn busemann_body(body: &dyn StarBody, resolution: usize) -> Result<ComparisonReport> {
    let n = body.dim();
    if !(n == 2 || n == 3) {
        return Err(Error::Unsupported(format!(
            "central-section quadrature is implemented for n = 2, 3; got n = {n}"
        )));
    }
    let (l, r, nodes) = sides(body, resolution)?;
    let (lc, rc, _) = sides(body, (resolution / 2).max(8))?;
    let lhs = Estimate::deterministic(l, (l - lc).abs(), nodes, "section-integral");
    let rhs = Estimate::deterministic(r, (r - rc).abs(), nodes, "volume-bound");
    Ok(ComparisonReport::new("busemann", lhs, rhs))
}

/// Busemann comparison for the set carrying an indicator-type density.
pub fn busemann_ratio(f: &Density, resolution: usize) -> Result<ComparisonReport> {
    match f.uniform_support() {
        Some(UniformSupport::Ball { center, radius }) => {
            busemann_body(&BallBody::new(center, radius)?, resolution)
        }
        Some(UniformSupport::Cube { dim, half_width }) => {
            let body = FnBody::new(dim, move |u: &[f64]| {
                half_width / u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            });
            busemann_body(&body, resolution)
        }
        None => Err(Error::Unsupported(
            "busemann_ratio needs a uniform density on a star body containing the origin".into(),
        )),
    }
}
