//! One-dimensional quadrature: double-exponential (tanh-sinh) for piecewise
//! smooth integrands with endpoint singularities, and Gauss-Legendre rules.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

/// Abscissa offsets and weights of the tanh-sinh rule on [-1, 1] at step
/// `H`. Offsets are stored as the distance to the nearer endpoint so that
/// integrands singular at an endpoint are evaluated without cancellation.
struct TanhSinh {
    // (distance to endpoint, weight, on-odd-level)
    nodes: Vec<(f64, f64, bool)>,
    centre_weight: f64,
}

const H: f64 = 1.0 / 32.0;
const T_MAX: f64 = 3.3;

fn rule() -> &'static TanhSinh {
    static RULE: OnceLock<TanhSinh> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = Vec::new();
        let mut k = 1usize;
        loop {
            let t = k as f64 * H;
            if t > T_MAX {
                break;
            }
            let u = FRAC_PI_2 * t.sinh();
            // 1 - tanh(u) = 2 / (exp(2u) + 1)
            let dist = 2.0 / ((2.0 * u).exp() + 1.0);
            let w = H * FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
            if dist > 0.0 && w > 0.0 {
                nodes.push((dist, w, k % 2 == 1));
            }
            k += 1;
        }
        TanhSinh {
            nodes,
            centre_weight: H * FRAC_PI_2,
        }
    })
}

/// Integrate `f` over `[a, b]` (finite). Returns `(value, error_estimate)`,
/// the error estimate being the difference to the half-resolution rule.
/// Endpoint singularities of integrable type are handled; `f` is never
/// evaluated at the endpoints themselves.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = a + half;
    let fm = f(mid);
    let mut full = r.centre_weight * fm;
    let mut coarse = 2.0 * r.centre_weight * fm;
    for &(d, w, odd) in &r.nodes {
        let off = half * d;
        let xl = a + off;
        let xr = b - off;
        let mut s = 0.0;
        if xl > a && xl < b {
            s += f(xl);
        }
        if xr > a && xr < b {
            s += f(xr);
        }
        full += w * s;
        if !odd {
            coarse += 2.0 * w * s;
        }
    }
    let v = full * half;
    let c = coarse * half;
    (v, (v - c).abs())
}

/// Integrate over `[lo, hi]` split at every breakpoint strictly inside.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, breaks: &[f64]) -> (f64, f64) {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&t| t > lo && t < hi && t.is_finite())
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + x.abs()));
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = integrate(&f, w[0], w[1]);
        total += v;
        err += e;
    }
    (total, err)
}

/// `int_0^b t^p g(t) dt` for `p > -1` and `g` regular at 0, after the
/// substitution `t = b v^{1/(p+1)}` which removes the power weight.
pub fn integrate_power<F: Fn(f64) -> f64>(g: F, p: f64, b: f64) -> (f64, f64) {
    if b <= 0.0 {
        return (0.0, 0.0);
    }
    let gamma = 1.0 / (p + 1.0);
    let scale = b.powf(p + 1.0) / (p + 1.0);
    let (v, e) = integrate(|v: f64| g(b * v.powf(gamma)), 0.0, 1.0);
    (scale * v, scale * e)
}

/// `int_lo^hi |t|^p g(t) dt` with `lo < 0 < hi` allowed, `g` smooth between
/// the breakpoints. Pieces touching 0 use [`integrate_power`].
pub fn integrate_abs_power<F: Fn(f64) -> f64>(
    g: F,
    p: f64,
    lo: f64,
    hi: f64,
    breaks: &[f64],
) -> (f64, f64) {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&t| t > lo && t < hi && t != 0.0 && t.is_finite())
        .collect();
    if lo < 0.0 && hi > 0.0 {
        pts.push(0.0);
    }
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + x.abs()));
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (v, e) = if a == 0.0 {
            integrate_power(&g, p, b)
        } else if b == 0.0 {
            integrate_power(|t| g(-t), p, -a)
        } else {
            integrate(|t| t.abs().powf(p) * g(t), a, b)
        };
        total += v;
        err += e;
    }
    (total, err)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
