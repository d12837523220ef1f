//! Level sets, symmetric decreasing rearrangement, ball flattening,
//! truncation and L_p distances.

use statrs::function::gamma::gamma_lr;

use super::grid::GridData;
use super::profile::{merge_shells, RadialProfile};
use super::{Density, Family};
use crate::error::{invalid, Error, Result};
use crate::numerics::constants::ln_unit_ball_volume;
use crate::numerics::quad::integrate_pieces;

fn ball_vol(n: usize, r: f64) -> f64 {
    (ln_unit_ball_volume(n) + n as f64 * r.ln()).exp()
}

/// Lattice resolution per axis used when a density has to be rasterised.
fn raster_resolution(n: usize) -> (usize, usize) {
    match n {
        1 => (4096, 4),
        2 => (384, 4),
        3 => (64, 3),
        _ => (16, 2),
    }
}

/// Cell averages of `f` on its bounding box `[-R, R]^n`.
pub fn rasterize(f: &Density) -> Result<GridData> {
    if !f.is_compact() {
        return Err(Error::Unsupported(
            "rasterisation needs a compactly supported density".into(),
        ));
    }
    rasterize_box(f, f.support_radius() * (1.0 + 1e-9))
}

/// Cell averages of `f` on `[-r, r]^n` with `sub^n` points per cell.
pub fn rasterize_box(f: &Density, r: f64) -> Result<GridData> {
    let n = f.dim();
    let (m, _) = raster_resolution(n);
    let values = cell_averages(n, r, |x| f.eval(x));
    GridData::new(vec![-r; n], vec![r; n], vec![m; n], values)
}

fn cell_averages<F: Fn(&[f64]) -> f64 + Sync + Send>(n: usize, r: f64, f: F) -> Vec<f64> {
    let (m, sub) = raster_resolution(n);
    let h = 2.0 * r / m as f64;
    let cells = m.pow(n as u32);
    let subs = sub.pow(n as u32);
    crate::numerics::rng::par_map(cells, |flat| {
        let mut idx = vec![0usize; n];
        let mut f_ = flat;
        for k in (0..n).rev() {
            idx[k] = f_ % m;
            f_ /= m;
        }
        let mut x = vec![0.0; n];
        let mut acc = 0.0;
        for s in 0..subs {
            let mut t = s;
            for k in 0..n {
                let j = t % sub;
                t /= sub;
                x[k] = -r + (idx[k] as f64 + (j as f64 + 0.5) / sub as f64) * h;
            }
            acc += f(&x);
        }
        acc / subs as f64
    })
}

/// `|{f > t}|` for `t >= 0`.
pub fn level_set_volume(f: &Density, t: f64) -> Result<f64> {
    let n = f.dim();
    if t < 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(match &f.family {
        Family::Ball { radius, .. } => {
            if t < f.sup_norm() {
                ball_vol(n, *radius)
            } else {
                0.0
            }
        }
        Family::Cube { half_width } => {
            if t < f.sup_norm() {
                (2.0 * half_width).powi(n as i32)
            } else {
                0.0
            }
        }
        Family::Radial(p) => p.level_volume(t, n),
        Family::Gaussian { sigmas } => {
            let c = f.sup_norm();
            if t >= c {
                0.0
            } else if t == 0.0 {
                f64::INFINITY
            } else {
                let scale: f64 = sigmas.iter().product();
                scale * ball_vol(n, (2.0 * (c / t).ln()).sqrt())
            }
        }
        Family::TruncGaussian { sigma, radius, .. } => {
            let c = f.sup_norm();
            if t >= c {
                0.0
            } else if t == 0.0 {
                ball_vol(n, *radius)
            } else {
                ball_vol(n, (sigma * (2.0 * (c / t).ln()).sqrt()).min(*radius))
            }
        }
        Family::Grid { data, .. } => {
            data.values.iter().filter(|&&v| v > t).count() as f64 * data.cell_volume()
        }
        Family::Mixture { .. } | Family::Truncated { .. } => {
            let g = rasterize(f)?;
            g.values.iter().filter(|&&v| v > t).count() as f64 * g.cell_volume()
        }
    })
}

/// Decreasing rearrangement of the cell values of a grid, as a radial step
/// profile (exact for the piecewise-constant grid).
pub fn rearrange_grid(g: &GridData) -> RadialProfile {
    let mut vals: Vec<f64> = g.values.iter().copied().filter(|v| *v > 0.0).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let cv = g.cell_volume();
    let mut shells: Vec<(f64, f64)> = Vec::new();
    for v in vals {
        match shells.last_mut() {
            Some(last) if last.0 == v => last.1 += cv,
            _ => shells.push((v, cv)),
        }
    }
    merge_shells(shells, g.dim)
}

/// Symmetric decreasing rearrangement `f*`.
pub fn rearrange(f: &Density) -> Result<Density> {
    let n = f.dim();
    Ok(match &f.family {
        Family::Ball { radius, .. } => Density::ball(n, *radius),
        Family::Cube { half_width } => {
            let vol = (2.0 * half_width).powi(n as i32);
            Density::ball(n, (vol / ball_vol(n, 1.0)).powf(1.0 / n as f64))
        }
        Family::Radial(p) => {
            let mut d = Density::radial_step(n, p.rearranged(n))?;
            if p.values.windows(2).all(|w| w[0] >= w[1]) {
                // already decreasing: keep the original tag
                d.tag = f.tag();
            }
            d
        }
        Family::Gaussian { sigmas } => {
            let g = sigmas.iter().map(|s| s.ln()).sum::<f64>() / n as f64;
            Density::gaussian(vec![g.exp(); n])
        }
        Family::TruncGaussian { .. } => f.clone(),
        Family::Grid { data, .. } => Density::radial_step(n, rearrange_grid(data))?,
        Family::Mixture { .. } | Family::Truncated { .. } => {
            if !f.is_compact() {
                return Err(Error::Unsupported(
                    "rearrangement of a non-compact mixture has no computable level sets".into(),
                ));
            }
            Density::radial_step(n, rearrange_grid(&rasterize(f)?))?
        }
    })
}

/// Uniform density on the centred ball whose height equals `sup f`.
pub fn ball_flatten(f: &Density) -> Result<Density> {
    let s = f.sup_norm();
    if !(s > 0.0 && s.is_finite()) {
        return Err(invalid("f", "sup norm must be finite and positive"));
    }
    let n = f.dim();
    let r = (ball_vol(n, 1.0) * s).powf(-1.0 / n as f64);
    Ok(Density::ball(n, r))
}

/// `f` restricted to `k B_2^n` and renormalised.
pub fn truncate_normalize(f: &Density, k: f64) -> Result<Density> {
    if !(k > 0.0) {
        return Err(invalid("k", "truncation radius must be positive"));
    }
    let n = f.dim();
    if f.support_radius() <= k {
        return Ok(f.clone());
    }
    let out = match &f.family {
        Family::Gaussian { sigmas } if sigmas.iter().all(|s| *s == sigmas[0]) => {
            Density::truncated_gaussian(n, sigmas[0], k)
        }
        Family::TruncGaussian { sigma, .. } => Density::truncated_gaussian(n, *sigma, k),
        Family::Radial(p) => {
            let mut radii = Vec::new();
            let mut values = Vec::new();
            for (r, v) in p.radii.iter().zip(&p.values) {
                radii.push(r.min(k));
                values.push(*v);
                if *r >= k {
                    break;
                }
            }
            Density::radial_step(n, RadialProfile::new(radii, values)?)?
        }
        Family::Ball { center, radius } if center.iter().all(|v| *v == 0.0) => {
            Density::ball(n, radius.min(k))
        }
        _ => {
            let mass = captured_mass(f, k)?;
            Density::truncated_generic(f.clone(), k, mass)
        }
    };
    if let Family::TruncGaussian { mass, .. } = &out.family {
        if !(*mass > 0.0) {
            return Err(invalid("k", "truncation captures no mass"));
        }
    }
    Ok(out)
}

fn captured_mass(f: &Density, k: f64) -> Result<f64> {
    let n = f.dim();
    let mass = match &f.family {
        Family::Gaussian { sigmas } if sigmas.iter().all(|s| *s == sigmas[0]) => {
            gamma_lr(n as f64 / 2.0, k * k / (2.0 * sigmas[0] * sigmas[0]))
        }
        _ => {
            let probe = Density::truncated_generic(f.clone(), k, 1.0);
            let g = rasterize(&probe)?;
            g.mass()
        }
    };
    if !(mass > 0.0) {
        return Err(invalid("k", "truncation captures no mass"));
    }
    Ok(mass)
}

/// `||f - g||_p`.
///
/// Exact (1-D radial quadrature) when both densities are rotation invariant,
/// exact cell sums for grids on a common lattice, exact for disjoint balls;
/// otherwise a rasterised approximation (about 1e-3 relative).
pub fn lp_distance(f: &Density, g: &Density, p: f64) -> Result<f64> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    if !(p >= 1.0) {
        return Err(invalid("p", "need p >= 1"));
    }
    let n = f.dim();
    if let (Some(rf), Some(rg)) = (f.radial_function(), g.radial_function()) {
        let rmax = f.support_radius().max(g.support_radius());
        let rmax = if rmax.is_finite() { rmax } else { 40.0 };
        let mut breaks = f.radial_breaks();
        breaks.extend(g.radial_breaks());
        let surface = n as f64 * ball_vol(n, 1.0);
        let (v, _) = integrate_pieces(
            |r| r.powi(n as i32 - 1) * (rf(r) - rg(r)).abs().powf(p),
            0.0,
            rmax,
            &breaks,
        );
        return Ok((surface * v).powf(1.0 / p));
    }
    if let (Family::Grid { data: a, .. }, Family::Grid { data: b, .. }) = (&f.family, &g.family) {
        if a.same_lattice(b) {
            let s: f64 = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| (x - y).abs().powf(p))
                .sum();
            return Ok((s * a.cell_volume()).powf(1.0 / p));
        }
    }
    if let (Family::Ball { center: c1, radius: r1 }, Family::Ball { center: c2, radius: r2 }) =
        (&f.family, &g.family)
    {
        let d: f64 = c1.iter().zip(c2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if d >= r1 + r2 {
            let part = |s: f64, r: f64| s.powf(p) * ball_vol(n, r);
            return Ok((part(f.sup_norm(), *r1) + part(g.sup_norm(), *r2)).powf(1.0 / p));
        }
    }
    if !f.is_compact() || !g.is_compact() {
        return Err(Error::Unsupported("lp_distance needs compact supports".into()));
    }
    let r = f.support_radius().max(g.support_radius()) * (1.0 + 1e-9);
    let (m, _) = raster_resolution(n);
    let s: f64 = cell_averages(n, r, |x| (f.eval(x) - g.eval(x)).abs().powf(p))
        .iter()
        .sum();
    Ok((s * (2.0 * r / m as f64).powi(n as i32)).powf(1.0 / p))
}
