//! Volumes of polars of linear images via the determinant formula and the
//! stable-mixture representation of `exp(-|t|^p)`.

use nalgebra::DMatrix;
use std::f64::consts::{LN_2, PI};

use super::estimate::Estimate;
use crate::bodies::{BlockSampleMatrix, SupportBody};
use crate::error::{invalid, Error, Result};
use crate::numerics::constants::{ln_a_nnp, ln_c_np, ln_unit_ball_volume};
use crate::numerics::rng::{par_blocks, RngStream};
use crate::numerics::sampling::{positive_stable, dot};
use crate::numerics::sphere::{sphere_quadrature, SphereGrid, SphereMode};
use crate::numerics::stats::RatioAcc;

/// Smallest budget accepted for mixture estimates.
pub const MIN_MIXTURE_BUDGET: usize = 1000;

/// How the volume inside each mixture draw is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerVolume {
    /// Closed form `omega_n det(sum w_i x_i x_i^T)^{-1/2}`; segments only.
    Determinant,
    /// Sphere quadrature of the polar body at the given resolution.
    SphereQuadrature { resolution: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    /// Exponent in `(0, 2)`.
    pub p: f64,
    /// Number of weight vectors drawn.
    pub budget: usize,
    pub inner: InnerVolume,
    pub stream: RngStream,
}

impl MixtureConfig {
    pub fn new(p: f64, budget: usize, inner: InnerVolume, stream: RngStream) -> Result<Self> {
        let cfg = Self {
            p,
            budget,
            inner,
            stream,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 2.0) {
            return Err(invalid("p", format!("need 0 < p < 2, got {}", self.p)));
        }
        if self.budget < MIN_MIXTURE_BUDGET {
            return Err(invalid(
                "budget",
                format!("need at least {MIN_MIXTURE_BUDGET} draws, got {}", self.budget),
            ));
        }
        if let InnerVolume::SphereQuadrature { resolution } = self.inner {
            if resolution < 8 {
                return Err(invalid("resolution", "need at least 8 nodes"));
            }
        }
        Ok(())
    }
}

/// Numerical rank of an `n x N` matrix from its singular values.
pub fn numerical_rank(x: &DMatrix<f64>) -> usize {
    let sv = x.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let tol = top * 1e-12 * x.nrows().max(x.ncols()) as f64;
    sv.iter().filter(|s| **s > tol).count()
}

fn check_full_rank(x: &DMatrix<f64>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("X", "entries must be finite"));
    }
    let rank = numerical_rank(x);
    if rank < x.nrows() {
        return Err(Error::Singular {
            rank,
            expected: x.nrows(),
        });
    }
    Ok(())
}

/// `omega_n det(sum_i w_i x_i x_i^T)^{-1/2}`, the volume of the polar of
/// the image of `B_2^N` under `[sqrt(w_1) x_1, ..., sqrt(w_N) x_N]`.
pub fn polar_volume_determinant(x: &DMatrix<f64>, w: &[f64]) -> Result<Estimate> {
    let n = x.nrows();
    if w.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: w.len(),
        });
    }
    if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(invalid("w", "weights must be finite and non-negative"));
    }
    let scaled = DMatrix::from_fn(n, x.ncols(), |i, j| x[(i, j)] * w[j].sqrt());
    check_full_rank(&scaled)?;
    let m = &scaled * scaled.transpose();
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(Error::Singular { rank: n - 1, expected: n });
    }
    let value = (ln_unit_ball_volume(n) - 0.5 * det.ln()).exp();
    Ok(Estimate::deterministic(value, 0.0, 1, "determinant"))
}

/// `ln det(sum w_i x_i x_i^T)` by the Cauchy-Binet expansion over the
/// `n`-subsets of columns, which has no cancellation when the weights span
/// many orders of magnitude.
struct MinorTable {
    subsets: Vec<Vec<usize>>,
    ln_minor_sq: Vec<f64>,
}

impl MinorTable {
    const MAX_SUBSETS: usize = 4096;

    fn new(x: &DMatrix<f64>) -> Option<Self> {
        let (n, big_n) = (x.nrows(), x.ncols());
        let mut subsets = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn rec(start: usize, n: usize, big_n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) -> bool {
            if cur.len() == n {
                out.push(cur.clone());
                return out.len() <= MinorTable::MAX_SUBSETS;
            }
            for i in start..big_n {
                cur.push(i);
                if !rec(i + 1, n, big_n, cur, out) {
                    return false;
                }
                cur.pop();
            }
            true
        }
        if !rec(0, n, big_n, &mut cur, &mut subsets) {
            return None;
        }
        let mut keep = Vec::new();
        let mut ln_minor_sq = Vec::new();
        for s in subsets {
            let d = x.select_columns(&s).determinant();
            if d != 0.0 {
                ln_minor_sq.push(2.0 * d.abs().ln());
                keep.push(s);
            }
        }
        Some(Self {
            subsets: keep,
            ln_minor_sq,
        })
    }

    fn ln_det(&self, ln_w: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .subsets
            .iter()
            .zip(&self.ln_minor_sq)
            .map(|(s, m)| m + s.iter().map(|&i| ln_w[i]).sum::<f64>())
            .collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    }
}

fn ln_det_weighted(x: &DMatrix<f64>, table: Option<&MinorTable>, ln_w: &[f64]) -> f64 {
    if let Some(t) = table {
        return t.ln_det(ln_w);
    }
    // Sort by weight so the largest columns are eliminated first.
    let mut order: Vec<usize> = (0..x.ncols()).collect();
    order.sort_by(|a, b| ln_w[*b].total_cmp(&ln_w[*a]));
    let shift = ln_w[order[0]];
    let y = DMatrix::from_fn(x.ncols(), x.nrows(), |r, c| {
        let j = order[r];
        x[(c, j)] * (0.5 * (ln_w[j] - shift)).exp()
    });
    let r = y.qr().r();
    let n = x.nrows();
    (0..n).map(|i| 2.0 * r[(i, i)].abs().ln()).sum::<f64>() + n as f64 * shift
}

/// Per-draw weights: `ln w_i` for `N` independent `p/2`-stable draws.
fn draw_ln_weights<R: rand::Rng + ?Sized>(rng: &mut R, p: f64, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = positive_stable(rng, p / 2.0).ln();
    }
}

/// `ln(2^N a_{N,n,p})`.
///
/// The tilted weights are normalised so that
/// `exp(-|t|^p) = 2 d_p E sqrt(w) exp(-w t^2)`, which follows from the
/// Laplace transform `E exp(-s w) = exp(-s^{p/2})` of the untilted law.
fn ln_mixture_prefactor(big_n: usize, n: usize, p: f64) -> f64 {
    big_n as f64 * LN_2 + ln_a_nnp(big_n, n, p)
}

/// Self-normalised mixture average of `y(ln w)` under the tilted law.
fn mixture_average<F>(big_n: usize, cfg: &MixtureConfig, y: F) -> RatioAcc
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let parts = par_blocks(&cfg.stream, cfg.budget, |rng, a, b| {
        let mut acc = RatioAcc::default();
        let mut ln_w = vec![0.0; big_n];
        for _ in a..b {
            draw_ln_weights(rng, cfg.p, &mut ln_w);
            let half_sum: f64 = 0.5 * ln_w.iter().sum::<f64>();
            // importance weight prod w_i^{-1/2}
            acc.push((-half_sum).exp(), y(&ln_w));
        }
        acc
    });
    let mut acc = RatioAcc::default();
    for p in &parts {
        acc.merge(p);
    }
    acc
}

/// Per-node squared supports for the generalized inner body.
struct NodeTable {
    grid: SphereGrid,
    /// `h^2(C_i, X_i^T u_j)`, row `j`, column `i`.
    h2: Vec<f64>,
    blocks: usize,
}

impl NodeTable {
    fn new(grid: SphereGrid, blocks: usize, h: impl Fn(usize, &[f64]) -> f64) -> Self {
        let mut h2 = Vec::with_capacity(grid.len() * blocks);
        for u in &grid.nodes {
            for i in 0..blocks {
                let v = h(i, u);
                h2.push(v * v);
            }
        }
        Self { grid, h2, blocks }
    }

    /// `ln(omega_n^{-1} |K_W|)` where `rho(K_W, u)^{-2} = sum_i w_i h_i(u)^2`.
    fn ln_relative_volume(&self, ln_w: &[f64], n: usize) -> f64 {
        let w: Vec<f64> = ln_w.iter().map(|l| l.exp()).collect();
        let mut s = 0.0;
        for (row, wt) in self.h2.chunks(self.blocks).zip(&self.grid.weights) {
            let q: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
            s += wt * q.powf(-(n as f64) / 2.0);
        }
        s.ln()
    }
}

/// `|B_p^N ∩ Im(X^T)| / det(X X^T)^{1/2}` for an `n x N` matrix of full
/// rank `n`, by the stable-mixture formula.
pub fn nt_mixture_volume(x: &DMatrix<f64>, cfg: &MixtureConfig) -> Result<Estimate> {
    cfg.validate()?;
    check_full_rank(x)?;
    let (n, big_n) = (x.nrows(), x.ncols());
    let acc = match cfg.inner {
        InnerVolume::Determinant => {
            let table = MinorTable::new(x);
            mixture_average(big_n, cfg, |ln_w| {
                let half_sum: f64 = 0.5 * ln_w.iter().sum::<f64>();
                (half_sum - 0.5 * ln_det_weighted(x, table.as_ref(), ln_w)).exp()
            })
        }
        InnerVolume::SphereQuadrature { resolution } => {
            let grid = sphere_quadrature(n, resolution, SphereMode::Deterministic, Some(&cfg.stream))?;
            let cols: Vec<Vec<f64>> = (0..big_n).map(|j| x.column(j).iter().copied().collect()).collect();
            let table = NodeTable::new(grid, big_n, |i, u| dot(&cols[i], u).abs());
            mixture_average(big_n, cfg, |ln_w| {
                let half_sum: f64 = 0.5 * ln_w.iter().sum::<f64>();
                (half_sum + table.ln_relative_volume(ln_w, n)).exp()
            })
        }
    };
    let scale = (ln_mixture_prefactor(big_n, n, cfg.p) + n as f64 / 2.0 * PI.ln()).exp();
    let method = match cfg.inner {
        InnerVolume::Determinant => "nt-determinant",
        InnerVolume::SphereQuadrature { .. } => "nt-quadrature",
    };
    Ok(Estimate::new(acc.value(), acc.stderr(), 0.0, cfg.budget as u64, method)
        .scaled(scale)
        .with_seed(cfg.stream))
}

/// Volume of the empirical dual centroid body with `p in (0, 2)` for a fixed
/// sample matrix, by the stable-mixture formula with the inner body
/// `rho(K_W, u)^{-2} = sum_i w_i h^2(C_i, X_i^T u)`.
///
/// With `InnerVolume::Determinant` every body must be a one-dimensional
/// segment.
pub fn nt_generalized_volume(
    x: &BlockSampleMatrix,
    bodies: &[SupportBody],
    cfg: &MixtureConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    x.check_bodies(bodies)?;
    let n = x.n();
    let big_n = bodies.len();
    let nf = n as f64;
    let acc = match cfg.inner {
        InnerVolume::Determinant => {
            let scales: Vec<f64> = bodies
                .iter()
                .map(|c| {
                    c.segment_scale().ok_or_else(|| {
                        Error::Unsupported("determinant inner volume needs segment bodies".into())
                    })
                })
                .collect::<Result<_>>()?;
            let xs = DMatrix::from_fn(n, big_n, |r, j| x.column(j)[r] * scales[j]);
            check_full_rank(&xs)?;
            let table = MinorTable::new(&xs);
            mixture_average(big_n, cfg, |ln_w| {
                let half_sum: f64 = 0.5 * ln_w.iter().sum::<f64>();
                (half_sum - 0.5 * ln_det_weighted(&xs, table.as_ref(), ln_w)).exp()
            })
        }
        InnerVolume::SphereQuadrature { resolution } => {
            let grid = sphere_quadrature(n, resolution, SphereMode::Deterministic, Some(&cfg.stream))?;
            let table = NodeTable::new(grid, big_n, |i, u| bodies[i].h_image(x.block(i), u));
            mixture_average(big_n, cfg, |ln_w| {
                let half_sum: f64 = 0.5 * ln_w.iter().sum::<f64>();
                (half_sum + table.ln_relative_volume(ln_w, n)).exp()
            })
        }
    };
    // 2^N a_{N,n,p} c_{n,2}^{-1} N^{n/p} omega_n
    let ln_scale = ln_mixture_prefactor(big_n, n, cfg.p) - ln_c_np(n, 2.0)
        + nf / cfg.p * (big_n as f64).ln()
        + ln_unit_ball_volume(n);
    let method = match cfg.inner {
        InnerVolume::Determinant => "nt-determinant",
        InnerVolume::SphereQuadrature { .. } => "nt-quadrature",
    };
    Ok(Estimate::new(acc.value(), acc.stderr(), 0.0, cfg.budget as u64, method)
        .scaled(ln_scale.exp())
        .with_seed(cfg.stream))
}
