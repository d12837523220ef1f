//! Closed-form constants, all evaluated in log space.

use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Log of the volume of the Euclidean unit ball in R^n.
pub fn ln_unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    h * PI.ln() - ln_gamma(h + 1.0)
}

/// Volume of the Euclidean unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    Ok(ln_unit_ball_volume(n).exp())
}

/// `E |xi|^{-s}` for a standard Gaussian vector in R^n, `0 < s < n`.
pub fn gaussian_neg_moment(n: usize, s: f64) -> Result<f64> {
    let nf = n as f64;
    if !(s > 0.0 && s < nf) {
        return Err(invalid("s", format!("need 0 < s < n = {n}, got {s}")));
    }
    let ln = nf.ln() + ln_gamma((nf - s) / 2.0)
        - (s / 2.0 + 1.0) * std::f64::consts::LN_2
        - ln_gamma(nf / 2.0 + 1.0);
    Ok(ln.exp())
}

/// Normalising constants of the stable-mixture volume formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtConstants {
    /// `1 / Gamma(1 + n/p)`
    pub c_np: f64,
    /// `Gamma(1 + 1/p) / sqrt(pi)`
    pub d_p: f64,
    /// `pi^{-N/2} Gamma(1 + 1/p)^N / Gamma(1 + n/p)`; NaN outside `0 < p < 2`.
    pub a_nnp: f64,
}

pub fn ln_c_np(n: usize, p: f64) -> f64 {
    -ln_gamma(1.0 + n as f64 / p)
}

pub fn ln_d_p(p: f64) -> f64 {
    ln_gamma(1.0 + 1.0 / p) - 0.5 * PI.ln()
}

pub fn ln_a_nnp(big_n: usize, n: usize, p: f64) -> f64 {
    -(big_n as f64) / 2.0 * PI.ln() + big_n as f64 * ln_gamma(1.0 + 1.0 / p)
        - ln_gamma(1.0 + n as f64 / p)
}

pub fn nt_constants(big_n: usize, n: usize, p: f64) -> Result<NtConstants> {
    if big_n == 0 || n == 0 {
        return Err(invalid("N, n", "dimensions must be at least 1"));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(invalid("p", format!("need p > 0, got {p}")));
    }
    let a_nnp = if p < 2.0 {
        ln_a_nnp(big_n, n, p).exp()
    } else {
        f64::NAN
    };
    Ok(NtConstants {
        c_np: ln_c_np(n, p).exp(),
        d_p: ln_d_p(p).exp(),
        a_nnp,
    })
}

/// `asinh(1/alpha)`, the normaliser in the small-alpha limit of the
/// regularised intersection bodies.
pub fn sinh_scale(alpha: f64) -> f64 {
    (1.0 / alpha).asinh()
}
