//! Dual `L_{p,C}` centroid bodies, classical `L_p` centroid bodies,
//! intersection bodies and their `L_p^alpha` variants, exact and empirical.

use crate::bodies::{power_gauge, BlockSampleMatrix, StarBody, SupportBody};
use crate::densities::{Density, Density1D};
use crate::error::{invalid, Error, Result};
use crate::numerics::quad::{integrate_abs_power, integrate_pieces};
use crate::numerics::rng::{par_blocks, RngStream};
use crate::numerics::sampling::{dot, norm};
use crate::numerics::stats::MeanAcc;

/// Sample budget for Monte Carlo radial values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McBudget {
    pub samples: usize,
    pub stream: RngStream,
}

/// A radial value with its Monte Carlo standard error (0 when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialValue {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl RadialValue {
    fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            n_samples: 0,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= -1.0 {
        Ok(())
    } else {
        Err(invalid("p", format!("must lie in [-1, inf), got {p}")))
    }
}

fn check_direction(u: &[f64], n: usize) -> Result<f64> {
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let r = norm(u);
    if !(r > 0.0) {
        return Err(invalid("u", "direction must be nonzero"));
    }
    Ok(r)
}

/// `int |t|^p f_u(t) dt`, or `int log|t| f_u(t) dt` when `p = 0`.
pub(crate) fn marginal_moment(m: &Density1D, p: f64) -> f64 {
    let (lo, hi) = m.support();
    if p == 0.0 {
        let mut breaks = m.breaks.clone();
        breaks.push(0.0);
        integrate_pieces(|t| t.abs().ln() * m.eval(t), lo, hi, &breaks).0
    } else {
        integrate_abs_power(|t| m.eval(t), p, lo, hi, &m.breaks).0
    }
}

/// `rho` from the segment moment: `(a^p M)^{-1/p}`, or `exp(-log a - M)`.
fn segment_rho(moment: f64, a: f64, p: f64) -> f64 {
    if p == 0.0 {
        (-(a.ln() + moment)).exp()
    } else {
        (a.powf(p) * moment).powf(-1.0 / p)
    }
}

/// `rho(Z_{p,C}^◊(f), u)`.
///
/// Exact one-dimensional quadrature over the marginal when `C` is a
/// segment; otherwise Monte Carlo with `budget` (required).
pub fn dual_centroid_radial(
    f: &Density,
    c: &SupportBody,
    p: f64,
    u: &[f64],
    budget: Option<&McBudget>,
) -> Result<RadialValue> {
    check_p(p)?;
    let len = check_direction(u, f.dim())?;
    if let Some(a) = c.segment_scale() {
        if p == -1.0 {
            return Err(Error::Divergent(
                "E |<x,u>|^{-1} diverges for a segment; use intersection_radial".into(),
            ));
        }
        if let Ok(m) = f.marginal(u) {
            let rho = segment_rho(marginal_moment(&m, p), a, p) / len;
            return Ok(RadialValue::exact(rho));
        }
    }
    match budget {
        Some(b) => dual_centroid_radial_mc(f, c, p, u, b),
        None => Err(Error::Unsupported(
            "no closed form for this (f, C); a Monte Carlo budget is required".into(),
        )),
    }
}

/// Monte Carlo `rho(Z_{p,C}^◊(f), u)` from `budget.samples` independent
/// `m`-tuples of columns drawn from `f`.
pub fn dual_centroid_radial_mc(
    f: &Density,
    c: &SupportBody,
    p: f64,
    u: &[f64],
    budget: &McBudget,
) -> Result<RadialValue> {
    check_p(p)?;
    check_direction(u, f.dim())?;
    if budget.samples < 2 {
        return Err(invalid("samples", "need at least 2 samples"));
    }
    let n = f.dim();
    let m = c.dim();
    let parts = par_blocks(&budget.stream, budget.samples, |rng, start, end| {
        let mut acc = MeanAcc::default();
        let mut cols = vec![0.0; n * m];
        for _ in start..end {
            for col in cols.chunks_mut(n) {
                f.sample_into(rng, col);
            }
            let h = c.h_image(&cols, u);
            acc.push(if p == 0.0 { h.ln() } else { h.powf(p) });
        }
        acc
    });
    let acc = MeanAcc::merged(&parts);
    let (mean, se) = (acc.mean, acc.stderr());
    if p > 0.0 && !mean.is_finite() {
        return Err(Error::Divergent(format!("E h^{p} is not finite")));
    }
    let (value, stderr) = if p == 0.0 {
        let rho = (-mean).exp();
        (rho, rho * se)
    } else {
        let rho = mean.powf(-1.0 / p);
        (rho, (rho / (p * mean)).abs() * se)
    };
    Ok(RadialValue {
        value,
        stderr: if value.is_finite() { stderr } else { f64::INFINITY },
        n_samples: budget.samples,
    })
}

/// `Z_p^◊(f)` or `Z_{p,[-a,a]}^◊(f)` evaluated by marginal quadrature.
#[derive(Debug, Clone)]
pub struct ExactDualCentroid {
    f: Density,
    half_length: f64,
    p: f64,
    constant: Option<f64>,
}

impl ExactDualCentroid {
    /// `c` must be a one-dimensional segment and `p` in `(-1, inf)`.
    pub fn new(f: Density, c: &SupportBody, p: f64) -> Result<Self> {
        check_p(p)?;
        let a = c.segment_scale().ok_or_else(|| {
            Error::Unsupported("exact dual centroid bodies need C a segment".into())
        })?;
        if p == -1.0 {
            return Err(Error::Divergent(
                "E |<x,u>|^{-1} diverges for a segment; use intersection_radial".into(),
            ));
        }
        let mut u = vec![0.0; f.dim()];
        u[0] = 1.0;
        let m = f.marginal(&u)?;
        let constant = f
            .is_radial()
            .then(|| segment_rho(marginal_moment(&m, p), a, p));
        Ok(Self {
            f,
            half_length: a,
            p,
            constant,
        })
    }

    /// `E h^p` (or `E log h` at `p = 0`) along unit `u`.
    pub fn moment(&self, u: &[f64]) -> f64 {
        let m = self.f.marginal(u).expect("marginal checked at construction");
        let mm = marginal_moment(&m, self.p);
        if self.p == 0.0 {
            self.half_length.ln() + mm
        } else {
            self.half_length.powf(self.p) * mm
        }
    }
}

impl StarBody for ExactDualCentroid {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn radial(&self, x: &[f64]) -> f64 {
        let len = norm(x);
        if let Some(c) = self.constant {
            return c / len;
        }
        let m = self.f.marginal(x).expect("marginal checked at construction");
        segment_rho(marginal_moment(&m, self.p), self.half_length, self.p) / len
    }
}

/// `Z_{p,C}^◊(F)` built from one draw of `X`.
#[derive(Debug, Clone)]
pub struct EmpiricalDualCentroid {
    x: BlockSampleMatrix,
    bodies: Vec<SupportBody>,
    p: f64,
}

/// Build the empirical body; blocks of `x` must match the body dimensions.
pub fn empirical_dual_centroid(
    x: BlockSampleMatrix,
    bodies: Vec<SupportBody>,
    p: f64,
) -> Result<EmpiricalDualCentroid> {
    check_p(p)?;
    x.check_bodies(&bodies)?;
    Ok(EmpiricalDualCentroid { x, bodies, p })
}

impl EmpiricalDualCentroid {
    pub fn matrix(&self) -> &BlockSampleMatrix {
        &self.x
    }

    pub fn bodies(&self) -> &[SupportBody] {
        &self.bodies
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Volume work at `p < 0` needs every block of dimension at least `n + 1`.
    pub fn check_volume_hypothesis(&self) -> Result<()> {
        if self.p < 0.0 {
            let n = self.x.n();
            if let Some(c) = self.bodies.iter().find(|c| c.dim() < n + 1) {
                return Err(Error::Hypothesis(format!(
                    "p < 0 needs every body of dimension >= n + 1 = {}, found {}",
                    n + 1,
                    c.dim()
                )));
            }
        }
        Ok(())
    }

    /// Mean of `h^p` over blocks, or of `log h` when `p = 0`.
    pub fn block_mean(&self, u: &[f64]) -> f64 {
        let nb = self.bodies.len();
        let p = self.p;
        let mut s = 0.0;
        for (i, c) in self.bodies.iter().enumerate() {
            let h = c.h_image(self.x.block(i), u);
            s += if p == 0.0 {
                h.ln()
            } else if p == 1.0 {
                h
            } else if p == -1.0 {
                1.0 / h
            } else {
                h.powf(p)
            };
        }
        s / nb as f64
    }

    /// `N^{1/p} / gauge(B_p^N(C), X^T u)`; `1 / gauge` at `p = 0`.
    pub fn section_radial(&self, u: &[f64]) -> f64 {
        let mut hs = vec![0.0; self.bodies.len()];
        self.x.block_supports(&self.bodies, u, &mut hs);
        let g = power_gauge(&hs, self.p);
        if self.p == 0.0 {
            1.0 / g
        } else {
            (hs.len() as f64).powf(1.0 / self.p) / g
        }
    }
}

impl StarBody for EmpiricalDualCentroid {
    fn dim(&self) -> usize {
        self.x.n()
    }

    fn radial(&self, u: &[f64]) -> f64 {
        let m = self.block_mean(u);
        if self.p == 0.0 {
            (-m).exp()
        } else if self.p == 1.0 {
            1.0 / m
        } else if self.p == -1.0 {
            m
        } else {
            m.powf(-1.0 / self.p)
        }
    }
}

/// `h(Z_{p,N}, u) = (N^{-1} sum |<X_i,u>|^p)^{1/p}`; `p = inf` gives the max.
pub fn classical_centroid_support(cols: &[Vec<f64>], p: f64, u: &[f64]) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p", format!("support functions need p >= 1, got {p}")));
    }
    if cols.is_empty() {
        return Err(invalid("cols", "need at least one column"));
    }
    if let Some(c) = cols.iter().find(|c| c.len() != u.len()) {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: c.len(),
        });
    }
    let a = cols.iter().map(|c| dot(c, u).abs());
    Ok(if p == f64::INFINITY {
        a.fold(0.0, f64::max)
    } else {
        (a.map(|v| v.powf(p)).sum::<f64>() / cols.len() as f64).powf(1.0 / p)
    })
}

/// `rho(I(f), u) = int_{u^perp} f`, the marginal density at 0.
pub fn intersection_radial(f: &Density, u: &[f64]) -> Result<f64> {
    let len = check_direction(u, f.dim())?;
    Ok(f.marginal(u)?.eval(0.0) / len)
}

/// Intersection body `I(f)` as a star body.
#[derive(Debug, Clone)]
pub struct IntersectionBody {
    f: Density,
    constant: Option<f64>,
}

impl IntersectionBody {
    pub fn new(f: Density) -> Result<Self> {
        let mut u = vec![0.0; f.dim()];
        u[0] = 1.0;
        let v = intersection_radial(&f, &u)?;
        let constant = f.is_radial().then_some(v);
        Ok(Self { f, constant })
    }
}

impl StarBody for IntersectionBody {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn radial(&self, x: &[f64]) -> f64 {
        let len = norm(x);
        match self.constant {
            Some(c) => c / len,
            None => self.f.marginal(x).map_or(f64::NAN, |m| m.eval(0.0)) / len,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must be positive, got {alpha}")))
    }
}

fn check_negative_p(p: f64) -> Result<()> {
    if (-1.0..0.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid("p", format!("must lie in [-1, 0), got {p}")))
    }
}

/// `int (t^2 + alpha^2)^{-q/2} f_u(t) dt`.
pub(crate) fn regularized_moment(m: &Density1D, q: f64, alpha: f64) -> f64 {
    let (lo, hi) = m.support();
    let mut breaks = m.breaks.clone();
    breaks.push(0.0);
    let mut s = alpha;
    while s < lo.abs().max(hi.abs()) {
        breaks.push(s);
        breaks.push(-s);
        s *= 2.0;
    }
    integrate_pieces(|t| (t * t + alpha * alpha).powf(-0.5 * q) * m.eval(t), lo, hi, &breaks).0
}

/// `rho(I_{|p|}^alpha(f), u)`, exact by marginal quadrature when the marginal
/// is available, otherwise Monte Carlo with `budget`.
pub fn lp_intersection_radial(
    f: &Density,
    p: f64,
    alpha: f64,
    u: &[f64],
    budget: Option<&McBudget>,
) -> Result<RadialValue> {
    check_negative_p(p)?;
    check_alpha(alpha)?;
    let len = check_direction(u, f.dim())?;
    let q = -p;
    if let Ok(m) = f.marginal(u) {
        let v = regularized_moment(&m, q, alpha).powf(1.0 / q) / len;
        return Ok(RadialValue::exact(v));
    }
    match budget {
        Some(b) => lp_intersection_radial_mc(f, p, alpha, u, b),
        None => Err(Error::Unsupported(
            "no marginal for this density; a Monte Carlo budget is required".into(),
        )),
    }
}

/// Monte Carlo `rho(I_{|p|}^alpha(f), u)` from `budget.samples` draws of `f`.
pub fn lp_intersection_radial_mc(
    f: &Density,
    p: f64,
    alpha: f64,
    u: &[f64],
    b: &McBudget,
) -> Result<RadialValue> {
    check_negative_p(p)?;
    check_alpha(alpha)?;
    check_direction(u, f.dim())?;
    if b.samples < 2 {
        return Err(invalid("samples", "need at least 2 samples"));
    }
    let q = -p;
    let uu = dot(u, u);
    let n = f.dim();
    let parts = par_blocks(&b.stream, b.samples, |rng, start, end| {
        let mut acc = MeanAcc::default();
        let mut x = vec![0.0; n];
        for _ in start..end {
            f.sample_into(rng, &mut x);
            acc.push((dot(&x, u).powi(2) + alpha * alpha * uu).powf(-0.5 * q));
        }
        acc
    });
    let acc = MeanAcc::merged(&parts);
    let rho = acc.mean.powf(1.0 / q);
    Ok(RadialValue {
        value: rho,
        stderr: rho / (q * acc.mean) * acc.stderr(),
        n_samples: b.samples,
    })
}

/// `I_{|p|}^alpha(f)` as a star body (marginal quadrature per direction).
#[derive(Debug, Clone)]
pub struct ExactLpIntersection {
    f: Density,
    q: f64,
    alpha: f64,
    constant: Option<f64>,
}

impl ExactLpIntersection {
    pub fn new(f: Density, p: f64, alpha: f64) -> Result<Self> {
        check_negative_p(p)?;
        check_alpha(alpha)?;
        let q = -p;
        let mut u = vec![0.0; f.dim()];
        u[0] = 1.0;
        let m = f.marginal(&u)?;
        let constant = f
            .is_radial()
            .then(|| regularized_moment(&m, q, alpha).powf(1.0 / q));
        Ok(Self {
            f,
            q,
            alpha,
            constant,
        })
    }
}

impl StarBody for ExactLpIntersection {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn radial(&self, x: &[f64]) -> f64 {
        let len = norm(x);
        if let Some(c) = self.constant {
            return c / len;
        }
        let m = self.f.marginal(x).expect("marginal checked at construction");
        regularized_moment(&m, self.q, self.alpha).powf(1.0 / self.q) / len
    }
}

/// `rho(I_{|p|,N}^alpha, u)` with `rho^{|p|} = N^{-1} sum rho^{|p|}(E^alpha(X_i), u)`.
pub fn empirical_lp_intersection(cols: &[Vec<f64>], p: f64, alpha: f64, u: &[f64]) -> Result<f64> {
    let body = EmpiricalLpIntersection::new(cols, p, alpha)?;
    check_direction(u, body.n)?;
    Ok(body.radial(u))
}

/// Empirical `L_p^alpha` intersection body from columns `X_1, ..., X_N`.
#[derive(Debug, Clone)]
pub struct EmpiricalLpIntersection {
    n: usize,
    cols: Vec<f64>,
    q: f64,
    alpha: f64,
}

impl EmpiricalLpIntersection {
    pub fn new(cols: &[Vec<f64>], p: f64, alpha: f64) -> Result<Self> {
        check_negative_p(p)?;
        check_alpha(alpha)?;
        let n = cols.first().map_or(0, |c| c.len());
        if n == 0 {
            return Err(invalid("cols", "need at least one nonempty column"));
        }
        if let Some(c) = cols.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
        Ok(Self {
            n,
            cols: cols.concat(),
            q: -p,
            alpha,
        })
    }

    pub fn from_matrix(x: &BlockSampleMatrix, p: f64, alpha: f64) -> Result<Self> {
        check_negative_p(p)?;
        check_alpha(alpha)?;
        Ok(Self {
            n: x.n(),
            cols: x.as_flat().to_vec(),
            q: -p,
            alpha,
        })
    }
}

impl StarBody for EmpiricalLpIntersection {
    fn dim(&self) -> usize {
        self.n
    }

    fn radial(&self, u: &[f64]) -> f64 {
        let a2uu = self.alpha * self.alpha * dot(u, u);
        let big_n = self.cols.len() / self.n;
        let s: f64 = self
            .cols
            .chunks(self.n)
            .map(|c| {
                let v = dot(c, u).powi(2) + a2uu;
                if self.q == 1.0 {
                    v.sqrt().recip()
                } else {
                    v.powf(-0.5 * self.q)
                }
            })
            .sum();
        let mean = s / big_n as f64;
        if self.q == 1.0 {
            mean
        } else {
            mean.powf(1.0 / self.q)
        }
    }
}
