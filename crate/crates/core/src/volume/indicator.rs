//! Gaussian measure of intersections of polar images, and Monte Carlo checks
//! of the representations of radial powers as integrals of indicators.

use rand_distr::{Distribution, Exp1};

use super::estimate::Estimate;
use crate::bodies::blocks::membership_unchecked;
use crate::bodies::{BlockSampleMatrix, SupportBody};
use crate::error::{invalid, Error, Result};
use crate::numerics::rng::{par_blocks, RngStream};
use crate::numerics::sampling::fill_gaussian;
use crate::numerics::stats::MeanAcc;

fn check_setup(x: &BlockSampleMatrix, bodies: &[SupportBody]) -> Result<()> {
    x.check_bodies(bodies)
}

/// `gamma_n` of `(t_1 X_1 C_1)° ∩ ... ∩ (t_N X_N C_N)°`: the fraction of
/// standard Gaussian points passing [`crate::bodies::polar_membership`].
pub fn gaussian_measure_polar(
    x: &BlockSampleMatrix,
    bodies: &[SupportBody],
    t: &[f64],
    samples: usize,
    stream: &RngStream,
) -> Result<Estimate> {
    check_setup(x, bodies)?;
    if t.len() != bodies.len() {
        return Err(Error::DimensionMismatch {
            expected: bodies.len(),
            got: t.len(),
        });
    }
    if t.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(invalid("t", "scales must be positive and finite"));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 draws"));
    }
    let n = x.n();
    let hits: u64 = par_blocks(stream, samples, |rng, a, b| {
        let mut u = vec![0.0; n];
        let mut k = 0u64;
        for _ in a..b {
            fill_gaussian(rng, &mut u);
            if membership_unchecked(&u, x, bodies, t) {
                k += 1;
            }
        }
        k
    })
    .iter()
    .sum();
    let m = samples as f64;
    let q = hits as f64 / m;
    let se = (q * (1.0 - q) / m).sqrt();
    Ok(Estimate::new(q, se, 0.0, samples as u64, "gaussian-measure").with_seed(*stream))
}

/// Which representation to check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndicatorCase {
    /// `p = 0`: `rho^s = prod_i h_i^{-s/N}` with exponents `N/s`.
    Geometric { s: f64 },
    /// `p in [-1, 0)`: `rho^{k|p|}` expanded over multi-indices with
    /// exponents `1/(k_i |p|)`.
    Multinomial { p: f64, k: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorConfig {
    pub case: IndicatorCase,
    /// Draws of `t` per multi-index term.
    pub samples: usize,
    pub stream: RngStream,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorReport {
    /// Radial power evaluated directly from the support values.
    pub direct: f64,
    /// Monte Carlo value of the integral of indicators.
    pub estimate: Estimate,
    /// `(estimate - direct) / stderr`.
    pub z: f64,
    /// Number of multi-index terms integrated.
    pub terms: usize,
    /// Relative standard error too large to decide.
    pub inconclusive: bool,
    pub passed: bool,
}

/// Relative standard error above which a check is reported inconclusive.
const MAX_RELATIVE_STDERR: f64 = 0.1;

/// All `k_vec in {0..k}^N` with `sum = k`.
pub fn compositions(k: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(left - v, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(k, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// `k! / (k_1! ... k_N!)`.
pub fn multinomial(k: &[usize]) -> f64 {
    let total: usize = k.iter().sum();
    let ln = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    (ln(total) - k.iter().map(|&m| ln(m)).sum::<f64>()).exp().round()
}

/// Membership as a function of `t` restricted to the active blocks, with
/// scale `t_i^{e_i}` on block `i` and every other block switched off.
struct Slice<'a> {
    u: &'a [f64],
    x: &'a BlockSampleMatrix,
    bodies: &'a [SupportBody],
    active: Vec<usize>,
    exponents: Vec<f64>,
}

impl Slice<'_> {
    fn member(&self, t: &[f64]) -> bool {
        let mut scales = vec![0.0; self.bodies.len()];
        for ((&i, e), ti) in self.active.iter().zip(&self.exponents).zip(t) {
            scales[i] = ti.powf(*e);
        }
        membership_unchecked(self.u, self.x, self.bodies, &scales)
    }

    /// Extent of the set along coordinate `j` with the others near zero,
    /// located by bisection on membership.
    fn extent(&self, j: usize) -> f64 {
        let mut t = vec![1e-300; self.active.len()];
        let mut probe = |v: f64| {
            t[j] = v;
            self.member(&t)
        };
        if !probe(1e-300) {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while probe(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if probe(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Volume of `{t in R_+^m : member(t)}` by importance sampling with an
    /// exponential proposal per coordinate, rate matched to its extent.
    fn volume(&self, samples: usize, stream: &RngStream) -> Result<Estimate> {
        let rates: Vec<f64> = (0..self.active.len())
            .map(|j| {
                let e = self.extent(j);
                if e.is_finite() && e > 0.0 {
                    Ok(1.6 / e)
                } else if e == 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::Divergent("indicator set is unbounded".into()))
                }
            })
            .collect::<Result<_>>()?;
        if rates.contains(&0.0) {
            return Ok(Estimate::new(0.0, 0.0, 0.0, 0, "indicator"));
        }
        let m = self.active.len();
        let parts = par_blocks(stream, samples, |rng, a, b| {
            let mut acc = MeanAcc::default();
            let mut t = vec![0.0; m];
            for _ in a..b {
                let mut ln_q = 0.0;
                for (tj, r) in t.iter_mut().zip(&rates) {
                    let e: f64 = Exp1.sample(rng);
                    *tj = e / r;
                    ln_q += r.ln() - e;
                }
                let y = if self.member(&t) { (-ln_q).exp() } else { 0.0 };
                acc.push(y);
            }
            acc
        });
        let acc = MeanAcc::merged(&parts);
        Ok(Estimate::new(acc.mean, acc.stderr(), 0.0, samples as u64, "indicator"))
    }
}

/// Compare, at a fixed direction `u`, the Monte Carlo integral over
/// `R_+^m` of a membership indicator with the radial power computed
/// directly from the support values `h_i = h(C_i, X_i^T u)`.
///
/// For `p = 0` the target is `rho^s = prod h_i^{-s/N}`. For `p < 0` it is
/// `rho^{k|p|} = N^{-k} (sum h_i^{-|p|})^k`, each multinomial term being
/// integrated separately.
pub fn indicator_rep_check(
    x: &BlockSampleMatrix,
    bodies: &[SupportBody],
    u: &[f64],
    cfg: &IndicatorConfig,
) -> Result<IndicatorReport> {
    check_setup(x, bodies)?;
    if u.len() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            got: u.len(),
        });
    }
    if u.iter().all(|v| *v == 0.0) {
        return Err(invalid("u", "direction must be non-zero"));
    }
    if cfg.samples < 100 {
        return Err(invalid("samples", "need at least 100 draws"));
    }
    let big_n = bodies.len();
    let mut h = vec![0.0; big_n];
    x.block_supports(bodies, u, &mut h);
    if h.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Divergent("a support value vanishes at u".into()));
    }
    let (direct, estimate, terms) = match cfg.case {
        IndicatorCase::Geometric { s } => {
            if !(s > 0.0) || !s.is_finite() {
                return Err(invalid("s", format!("need s > 0, got {s}")));
            }
            let direct = h.iter().map(|v| v.powf(-s / big_n as f64)).product::<f64>();
            let slice = Slice {
                u,
                x,
                bodies,
                active: (0..big_n).collect(),
                exponents: vec![big_n as f64 / s; big_n],
            };
            (direct, slice.volume(cfg.samples, &cfg.stream)?, 1)
        }
        IndicatorCase::Multinomial { p, k } => {
            if !(-1.0..0.0).contains(&p) {
                return Err(invalid("p", format!("need -1 <= p < 0, got {p}")));
            }
            if k == 0 {
                return Err(invalid("k", "need k >= 1"));
            }
            let q = -p;
            let nk = big_n as f64;
            let direct = (h.iter().map(|v| v.powf(-q)).sum::<f64>() / nk).powi(k as i32);
            let mut value = 0.0;
            let mut var = 0.0;
            let comps = compositions(k, big_n);
            for (idx, kv) in comps.iter().enumerate() {
                let active: Vec<usize> = (0..big_n).filter(|&i| kv[i] > 0).collect();
                let exponents = active.iter().map(|&i| 1.0 / (kv[i] as f64 * q)).collect();
                let slice = Slice {
                    u,
                    x,
                    bodies,
                    active,
                    exponents,
                };
                let e = slice.volume(cfg.samples, &cfg.stream.child(idx as u64))?;
                let c = multinomial(kv) * nk.powi(-(k as i32));
                value += c * e.value;
                var += (c * e.stderr).powi(2);
            }
            let n_samples = (cfg.samples * comps.len()) as u64;
            (
                direct,
                Estimate::new(value, var.sqrt(), 0.0, n_samples, "indicator"),
                comps.len(),
            )
        }
    };
    let estimate = Estimate {
        seed: Some(cfg.stream),
        ..estimate
    };
    let diff = estimate.value - direct;
    let z = if estimate.stderr > 0.0 {
        diff / estimate.stderr
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    let inconclusive = !(estimate.stderr <= MAX_RELATIVE_STDERR * direct);
    Ok(IndicatorReport {
        direct,
        z,
        terms,
        inconclusive,
        passed: !inconclusive && z.abs() <= 4.0,
        estimate,
    })
}
