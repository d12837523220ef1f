//! Block random matrices `X = [X_1 ... X_N]`, generalized balls
//! `B_p^N(C_1, ..., C_N)` and polar membership.

use nalgebra::DMatrix;
use rand::Rng;

use super::support::SupportBody;
use crate::densities::Density;
use crate::error::{invalid, Error, Result};
use crate::numerics::rng::RngStream;

/// `n x M` matrix stored column by column; block `i` is `widths[i]`
/// consecutive columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSampleMatrix {
    n: usize,
    widths: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
    /// Stream the columns were drawn from, if any.
    pub seed: Option<RngStream>,
}

fn offsets_of(widths: &[usize]) -> Vec<usize> {
    let mut off = Vec::with_capacity(widths.len() + 1);
    let mut acc = 0;
    off.push(0);
    for w in widths {
        acc += w;
        off.push(acc);
    }
    off
}

impl BlockSampleMatrix {
    /// From column-major data of length `n * sum(widths)`.
    pub fn from_flat(n: usize, widths: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if widths.is_empty() || widths.contains(&0) {
            return Err(invalid("widths", "need at least one block, each of width >= 1"));
        }
        let offsets = offsets_of(&widths);
        let m = offsets[widths.len()];
        if data.len() != n * m {
            return Err(Error::DimensionMismatch {
                expected: n * m,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("columns", "entries must be finite"));
        }
        Ok(Self {
            n,
            widths,
            offsets,
            data,
            seed: None,
        })
    }

    pub fn from_columns(widths: Vec<usize>, columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.len());
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
        Self::from_flat(n, widths, columns.concat())
    }

    /// I.i.d. columns from `f`.
    pub fn sample<R: Rng + ?Sized>(f: &Density, widths: &[usize], rng: &mut R) -> Result<Self> {
        let n = f.dim();
        let m: usize = widths.iter().sum();
        let mut data = vec![0.0; n * m];
        for col in data.chunks_mut(n) {
            f.sample_into(rng, col);
        }
        Self::from_flat(n, widths.to_vec(), data)
    }

    /// Independent columns, column `j` drawn from `family[j]`.
    pub fn sample_family<R: Rng + ?Sized>(
        family: &[Density],
        widths: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        let m: usize = widths.iter().sum();
        if family.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: family.len(),
            });
        }
        let n = family[0].dim();
        if let Some(f) = family.iter().find(|f| f.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: f.dim(),
            });
        }
        let mut data = vec![0.0; n * m];
        for (col, f) in data.chunks_mut(n).zip(family) {
            f.sample_into(rng, col);
        }
        Self::from_flat(n, widths.to_vec(), data)
    }

    pub fn with_seed(mut self, seed: RngStream) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn num_blocks(&self) -> usize {
        self.widths.len()
    }

    pub fn num_columns(&self) -> usize {
        self.offsets[self.widths.len()]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    /// Columns of block `i`, back to back.
    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[self.offsets[i] * self.n..self.offsets[i + 1] * self.n]
    }

    pub fn block_columns(&self, i: usize) -> Vec<Vec<f64>> {
        self.block(i).chunks(self.n).map(|c| c.to_vec()).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// `X^T u`, concatenated over blocks.
    pub fn transpose_apply(&self, u: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|c| c.iter().zip(u).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.num_columns(), &self.data)
    }

    /// Per-block `h(C_i, X_i^T u)`.
    pub fn block_supports(&self, bodies: &[SupportBody], u: &[f64], out: &mut [f64]) {
        for (i, c) in bodies.iter().enumerate() {
            out[i] = c.h_image(self.block(i), u);
        }
    }

    /// Error unless body `i` has dimension `widths[i]` for every block.
    pub fn check_bodies(&self, bodies: &[SupportBody]) -> Result<()> {
        if bodies.len() != self.widths.len() {
            return Err(Error::DimensionMismatch {
                expected: self.widths.len(),
                got: bodies.len(),
            });
        }
        for (c, w) in bodies.iter().zip(&self.widths) {
            if c.dim() != *w {
                return Err(Error::DimensionMismatch {
                    expected: *w,
                    got: c.dim(),
                });
            }
        }
        Ok(())
    }
}

/// `(sum h_i^p)^{1/p}`, `(prod h_i)^{1/N}` at `p = 0`, `max h_i` at `p = inf`.
pub fn power_gauge(hs: &[f64], p: f64) -> f64 {
    if p == f64::INFINITY {
        hs.iter().copied().fold(0.0, f64::max)
    } else if p == 0.0 {
        if hs.contains(&0.0) {
            return 0.0;
        }
        (hs.iter().map(|h| h.ln()).sum::<f64>() / hs.len() as f64).exp()
    } else {
        hs.iter().map(|h| h.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// `B_p^N(C)`: bodies placed in orthogonal subspaces and combined through
/// their support functions.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedBall {
    pub bodies: Vec<SupportBody>,
    pub p: f64,
}

impl GeneralizedBall {
    /// `p` must lie in `[-1, inf]`.
    pub fn new(bodies: Vec<SupportBody>, p: f64) -> Result<Self> {
        if bodies.is_empty() {
            return Err(invalid("bodies", "need at least one body"));
        }
        if !(p >= -1.0) || p.is_nan() {
            return Err(invalid("p", format!("must lie in [-1, inf], got {p}")));
        }
        Ok(Self { bodies, p })
    }

    pub fn widths(&self) -> Vec<usize> {
        self.bodies.iter().map(|c| c.dim()).collect()
    }

    pub fn dim(&self) -> usize {
        self.bodies.iter().map(|c| c.dim()).sum()
    }

    /// Gauge at a point given as concatenated blocks `(x_1, ..., x_N)`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut hs = Vec::with_capacity(self.bodies.len());
        let mut at = 0;
        for c in &self.bodies {
            hs.push(c.h(&x[at..at + c.dim()]));
            at += c.dim();
        }
        Ok(power_gauge(&hs, self.p))
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.gauge(x)? <= 1.0)
    }

    /// Gauge at `X^T u`, i.e. with `h(C_i, X_i^T u)` per block.
    pub fn image_gauge(&self, x: &BlockSampleMatrix, u: &[f64]) -> Result<f64> {
        x.check_bodies(&self.bodies)?;
        if u.len() != x.n() {
            return Err(Error::DimensionMismatch {
                expected: x.n(),
                got: u.len(),
            });
        }
        let mut hs = vec![0.0; self.bodies.len()];
        x.block_supports(&self.bodies, u, &mut hs);
        Ok(power_gauge(&hs, self.p))
    }

    /// Polar for `p >= 1`: `B_q^N(C°)` with `1/p + 1/q = 1`.
    pub fn polar(&self) -> Result<GeneralizedBall> {
        if !(self.p >= 1.0) {
            return Err(Error::Unsupported(
                "polar of a generalized ball is only available for p >= 1".into(),
            ));
        }
        let q = if self.p == 1.0 {
            f64::INFINITY
        } else if self.p == f64::INFINITY {
            1.0
        } else {
            self.p / (self.p - 1.0)
        };
        let bodies = self
            .bodies
            .iter()
            .map(|c| c.polar())
            .collect::<Result<Vec<_>>>()?;
        Self::new(bodies, q)
    }
}

/// Whether `u` lies in `(t_1 X_1 C_1)° ∩ ... ∩ (t_N X_N C_N)°`, i.e.
/// `max_i t_i h(C_i, X_i^T u) <= 1`.
pub fn polar_membership(
    u: &[f64],
    x: &BlockSampleMatrix,
    bodies: &[SupportBody],
    t: &[f64],
) -> Result<bool> {
    x.check_bodies(bodies)?;
    if u.len() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            got: u.len(),
        });
    }
    if t.len() != bodies.len() {
        return Err(Error::DimensionMismatch {
            expected: bodies.len(),
            got: t.len(),
        });
    }
    if t.iter().any(|s| !(*s > 0.0)) {
        return Err(invalid("t", "scales must be positive"));
    }
    Ok(membership_unchecked(u, x, bodies, t))
}

pub(crate) fn membership_unchecked(
    u: &[f64],
    x: &BlockSampleMatrix,
    bodies: &[SupportBody],
    t: &[f64],
) -> bool {
    bodies
        .iter()
        .zip(t)
        .enumerate()
        .all(|(i, (c, s))| s * c.h_image(x.block(i), u) <= 1.0)
}
