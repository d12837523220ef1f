//! Origin-symmetric convex bodies given by their support functions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::sampling::{dot, norm};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Shape {
    /// `[-v, v]`
    Segment(Vec<f64>),
    /// `r B_2^m`
    Ball(f64),
    /// `[-a, a]^m`, support `a ||u||_1`
    Cube(f64),
    /// `a B_1^m`, support `a ||u||_inf`
    CrossPolytope(f64),
    /// Axis-aligned ellipsoid with semi-axes `a_i`.
    Ellipsoid(Vec<f64>),
    /// `C +_2 D`, support `sqrt(h_C^2 + h_D^2)`
    L2Sum(Box<SupportBody>, Box<SupportBody>),
    Scaled(f64, Box<SupportBody>),
    /// `A C` for a square matrix `A` (row-major), support `h(C, A^T u)`.
    Linear { a: Vec<f64>, body: Box<SupportBody> },
    /// `[-e_1, e_1] +_2 alpha conv{+-e_j : 2 <= j <= m+1}` in `R^{m+1}`.
    Cma { m: usize, alpha: f64 },
    /// Polar of [`Shape::Cma`]: support `sqrt(u_1^2 + (||u'||_1 / alpha)^2)`.
    CmaPolar { m: usize, alpha: f64 },
}

/// An origin-symmetric convex body in `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBody {
    dim: usize,
    pub(crate) shape: Shape,
    inradius: f64,
    circumradius: f64,
    unconditional: bool,
}

/// Serializable body description used in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SupportBodySpec {
    Segment {
        v: Vec<f64>,
    },
    EuclideanBall {
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    Cube {
        dim: usize,
        #[serde(default = "one")]
        half_width: f64,
    },
    CrossPolytope {
        dim: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    Ellipsoid {
        axes: Vec<f64>,
    },
    L2Sum {
        first: Box<SupportBodySpec>,
        second: Box<SupportBodySpec>,
    },
    Scaled {
        factor: f64,
        body: Box<SupportBodySpec>,
    },
    Linear {
        /// Row-major square matrix.
        matrix: Vec<Vec<f64>>,
        body: Box<SupportBodySpec>,
    },
    Cma {
        m: usize,
        alpha: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn check_pos(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

pub fn make_support_body(spec: &SupportBodySpec) -> Result<SupportBody> {
    match spec {
        SupportBodySpec::Segment { v } => SupportBody::segment(v.clone()),
        SupportBodySpec::EuclideanBall { dim, radius } => {
            check_pos("radius", *radius)?;
            SupportBody::ball(*dim, *radius)
        }
        SupportBodySpec::Cube { dim, half_width } => {
            check_pos("half_width", *half_width)?;
            SupportBody::cube(*dim, *half_width)
        }
        SupportBodySpec::CrossPolytope { dim, scale } => {
            check_pos("scale", *scale)?;
            SupportBody::cross_polytope(*dim, *scale)
        }
        SupportBodySpec::Ellipsoid { axes } => SupportBody::ellipsoid(axes.clone()),
        SupportBodySpec::L2Sum { first, second } => {
            SupportBody::l2_sum(make_support_body(first)?, make_support_body(second)?)
        }
        SupportBodySpec::Scaled { factor, body } => {
            SupportBody::scaled(*factor, make_support_body(body)?)
        }
        SupportBodySpec::Linear { matrix, body } => {
            let b = make_support_body(body)?;
            let m = b.dim();
            if matrix.len() != m || matrix.iter().any(|r| r.len() != m) {
                return Err(invalid("matrix", format!("must be {m}x{m}")));
            }
            SupportBody::linear(matrix.concat(), b)
        }
        SupportBodySpec::Cma { m, alpha } => SupportBody::cma(*m, *alpha),
    }
}

fn check_dim(m: usize) -> Result<()> {
    if m == 0 {
        Err(invalid("dim", "must be at least 1"))
    } else {
        Ok(())
    }
}

impl SupportBody {
    /// The segment `[-v, v]`. Its inradius is 0 unless `v` has one entry.
    pub fn segment(v: Vec<f64>) -> Result<Self> {
        check_dim(v.len())?;
        let len = norm(&v);
        if !(len > 0.0 && len.is_finite()) {
            return Err(invalid("v", "segment direction must be nonzero and finite"));
        }
        let nonzero = v.iter().filter(|x| **x != 0.0).count();
        Ok(Self {
            dim: v.len(),
            inradius: if v.len() == 1 { len } else { 0.0 },
            circumradius: len,
            unconditional: nonzero == 1,
            shape: Shape::Segment(v),
        })
    }

    /// `[-1, 1]` in `R^1`.
    pub fn unit_segment() -> Self {
        Self::segment(vec![1.0]).unwrap()
    }

    pub fn ball(m: usize, radius: f64) -> Result<Self> {
        check_dim(m)?;
        check_pos("radius", radius)?;
        Ok(Self {
            dim: m,
            shape: Shape::Ball(radius),
            inradius: radius,
            circumradius: radius,
            unconditional: true,
        })
    }

    pub fn cube(m: usize, half_width: f64) -> Result<Self> {
        check_dim(m)?;
        check_pos("half_width", half_width)?;
        Ok(Self {
            dim: m,
            shape: Shape::Cube(half_width),
            inradius: half_width,
            circumradius: half_width * (m as f64).sqrt(),
            unconditional: true,
        })
    }

    pub fn cross_polytope(m: usize, scale: f64) -> Result<Self> {
        check_dim(m)?;
        check_pos("scale", scale)?;
        Ok(Self {
            dim: m,
            shape: Shape::CrossPolytope(scale),
            inradius: scale / (m as f64).sqrt(),
            circumradius: scale,
            unconditional: true,
        })
    }

    pub fn ellipsoid(axes: Vec<f64>) -> Result<Self> {
        check_dim(axes.len())?;
        for a in &axes {
            check_pos("axes", *a)?;
        }
        Ok(Self {
            dim: axes.len(),
            inradius: axes.iter().copied().fold(f64::INFINITY, f64::min),
            circumradius: axes.iter().copied().fold(0.0, f64::max),
            unconditional: true,
            shape: Shape::Ellipsoid(axes),
        })
    }

    pub fn l2_sum(c: SupportBody, d: SupportBody) -> Result<Self> {
        if c.dim != d.dim {
            return Err(Error::DimensionMismatch {
                expected: c.dim,
                got: d.dim,
            });
        }
        Ok(Self {
            dim: c.dim,
            inradius: c.inradius.hypot(d.inradius),
            circumradius: c.circumradius.hypot(d.circumradius),
            unconditional: c.unconditional && d.unconditional,
            shape: Shape::L2Sum(Box::new(c), Box::new(d)),
        })
    }

    pub fn scaled(lambda: f64, c: SupportBody) -> Result<Self> {
        check_pos("factor", lambda)?;
        Ok(Self {
            dim: c.dim,
            inradius: lambda * c.inradius,
            circumradius: lambda * c.circumradius,
            unconditional: c.unconditional,
            shape: Shape::Scaled(lambda, Box::new(c)),
        })
    }

    /// Image `A C` of `C` under an invertible square matrix (row-major).
    /// Never flagged unconditional.
    pub fn linear(a: Vec<f64>, c: SupportBody) -> Result<Self> {
        let m = c.dim;
        if a.len() != m * m || a.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix", format!("must be a finite {m}x{m} matrix")));
        }
        let sv = DMatrix::from_row_slice(m, m, &a).singular_values();
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().copied().fold(0.0, f64::max);
        if !(smin > 1e-12 * smax) {
            return Err(invalid("matrix", "must be invertible"));
        }
        Ok(Self {
            dim: m,
            inradius: smin * c.inradius,
            circumradius: smax * c.circumradius,
            unconditional: false,
            shape: Shape::Linear { a, body: Box::new(c) },
        })
    }

    /// `C_m^alpha` in `R^{m+1}`.
    pub fn cma(m: usize, alpha: f64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "must be at least 1"));
        }
        check_pos("alpha", alpha)?;
        Ok(Self {
            dim: m + 1,
            shape: Shape::Cma { m, alpha },
            inradius: 1f64.min(alpha / (m as f64).sqrt()),
            circumradius: 1f64.max(alpha),
            unconditional: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Certified `r_0` with `r_0 ||u|| <= h(u)`.
    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// Certified `R_0` with `h(u) <= R_0 ||u||`.
    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn is_unconditional(&self) -> bool {
        self.unconditional
    }

    /// `h(C, u)`; `u` must have `dim` entries.
    pub fn h(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        match &self.shape {
            Shape::Segment(v) => dot(v, u).abs(),
            Shape::Ball(r) => r * norm(u),
            Shape::Cube(a) => a * u.iter().map(|x| x.abs()).sum::<f64>(),
            Shape::CrossPolytope(a) => a * u.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            Shape::Ellipsoid(ax) => ax
                .iter()
                .zip(u)
                .map(|(a, x)| (a * x) * (a * x))
                .sum::<f64>()
                .sqrt(),
            Shape::L2Sum(c, d) => c.h(u).hypot(d.h(u)),
            Shape::Scaled(l, c) => l * c.h(u),
            Shape::Linear { a, body } => {
                let m = self.dim;
                let atu: Vec<f64> = (0..m)
                    .map(|j| (0..m).map(|i| a[i * m + j] * u[i]).sum())
                    .collect();
                body.h(&atu)
            }
            Shape::Cma { alpha, .. } => {
                let t = u[1..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
                u[0].hypot(alpha * t)
            }
            Shape::CmaPolar { alpha, .. } => {
                let t: f64 = u[1..].iter().map(|x| x.abs()).sum();
                u[0].hypot(t / alpha)
            }
        }
    }

    /// `h(C, u)` with a dimension check.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        Ok(self.h(u))
    }

    /// `h(C, X_i^T u)` where `cols` holds the `dim` columns of `X_i`
    /// (each of length `n = u.len()`) back to back.
    pub fn h_image(&self, cols: &[f64], u: &[f64]) -> f64 {
        let n = u.len();
        let m = self.dim;
        debug_assert_eq!(cols.len(), n * m);
        let proj = |j: usize| dot(&cols[j * n..(j + 1) * n], u);
        match &self.shape {
            Shape::Segment(v) if m == 1 => v[0].abs() * proj(0).abs(),
            Shape::Ball(r) => r * (0..m).map(|j| proj(j).powi(2)).sum::<f64>().sqrt(),
            Shape::Cube(a) => a * (0..m).map(|j| proj(j).abs()).sum::<f64>(),
            Shape::CrossPolytope(a) => a * (0..m).fold(0.0f64, |s, j| s.max(proj(j).abs())),
            Shape::Cma { alpha, .. } => {
                let t = (1..m).fold(0.0f64, |s, j| s.max(proj(j).abs()));
                proj(0).hypot(alpha * t)
            }
            _ => {
                let mut buf = [0.0f64; 32];
                if m <= buf.len() {
                    for (j, b) in buf[..m].iter_mut().enumerate() {
                        *b = proj(j);
                    }
                    self.h(&buf[..m])
                } else {
                    let v: Vec<f64> = (0..m).map(proj).collect();
                    self.h(&v)
                }
            }
        }
    }

    /// The polar body `C°`, whose support function is the gauge of `C`.
    ///
    /// Segments in `R^m` with `m > 1` have unbounded polars and are rejected,
    /// as are `+_2` sums other than `C_m^alpha`.
    pub fn polar(&self) -> Result<SupportBody> {
        match &self.shape {
            Shape::Segment(v) if self.dim == 1 => Self::segment(vec![1.0 / v[0].abs()]),
            Shape::Segment(_) => Err(Error::Unsupported(
                "polar of a segment in dimension > 1 is unbounded".into(),
            )),
            Shape::Ball(r) => Self::ball(self.dim, 1.0 / r),
            Shape::Cube(a) => Self::cross_polytope(self.dim, 1.0 / a),
            Shape::CrossPolytope(a) => Self::cube(self.dim, 1.0 / a),
            Shape::Ellipsoid(ax) => Self::ellipsoid(ax.iter().map(|a| 1.0 / a).collect()),
            Shape::Scaled(l, c) => Self::scaled(1.0 / l, c.polar()?),
            Shape::Linear { a, body } => {
                let m = self.dim;
                let inv = DMatrix::from_row_slice(m, m, a)
                    .try_inverse()
                    .ok_or(Error::Singular { rank: 0, expected: m })?;
                let inv_t = inv.transpose();
                let rows: Vec<f64> = (0..m)
                    .flat_map(|i| (0..m).map(move |j| (i, j)))
                    .map(|(i, j)| inv_t[(i, j)])
                    .collect();
                Self::linear(rows, body.polar()?)
            }
            Shape::Cma { m, alpha } => Ok(Self {
                dim: self.dim,
                shape: Shape::CmaPolar {
                    m: *m,
                    alpha: *alpha,
                },
                inradius: 1.0 / self.circumradius,
                circumradius: 1.0 / self.inradius,
                unconditional: true,
            }),
            Shape::CmaPolar { m, alpha } => Self::cma(*m, *alpha),
            Shape::L2Sum(..) => Err(Error::Unsupported(
                "polar of a general +_2 sum has no closed form".into(),
            )),
        }
    }

    /// Half-length of a one-dimensional segment, `None` for other bodies.
    pub fn segment_scale(&self) -> Option<f64> {
        match &self.shape {
            Shape::Segment(v) if self.dim == 1 => Some(v[0].abs()),
            _ => None,
        }
    }
}

/// `h(C, X_i^T u)` for a block given as `m` columns of length `n`.
pub fn block_support(c: &SupportBody, block: &[Vec<f64>], u: &[f64]) -> Result<f64> {
    if block.len() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            got: block.len(),
        });
    }
    if let Some(col) = block.iter().find(|col| col.len() != u.len()) {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: col.len(),
        });
    }
    Ok(c.h_image(&block.concat(), u))
}

/// `rho(C°, u) = 1 / h(C, u)`; `+inf` on the kernel of `h`.
pub fn polar_radial(c: &SupportBody, u: &[f64]) -> Result<f64> {
    if u.iter().all(|v| *v == 0.0) {
        return Err(invalid("u", "direction must be nonzero"));
    }
    Ok(1.0 / c.support(u)?)
}

/// Radial function of `([-x, x] +_2 alpha B_2^n)°` at `u`.
pub fn ellipsoid_polar_radial(x: &[f64], alpha: f64, u: &[f64]) -> Result<f64> {
    check_pos("alpha", alpha)?;
    if x.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: x.len(),
        });
    }
    let uu = dot(u, u);
    if uu == 0.0 {
        return Err(invalid("u", "direction must be nonzero"));
    }
    Ok((dot(x, u).powi(2) + alpha * alpha * uu).powf(-0.5))
}
