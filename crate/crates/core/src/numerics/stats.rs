//! Mergeable accumulators and distribution tests.

/// Running mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAcc {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl MeanAcc {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanAcc) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut a = Self::default();
        xs.iter().for_each(|&x| a.push(x));
        a
    }

    pub fn merged<'a, I: IntoIterator<Item = &'a MeanAcc>>(parts: I) -> Self {
        let mut a = Self::default();
        for p in parts {
            a.merge(p);
        }
        a
    }
}

/// Self-normalised importance-sampling ratio `sum w y / sum w` with a
/// delta-method standard error. Sums are plain, so merging is exact.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RatioAcc {
    pub n: u64,
    sw: f64,
    swy: f64,
    sw2: f64,
    sw2y: f64,
    sw2y2: f64,
}

impl RatioAcc {
    pub fn push(&mut self, w: f64, y: f64) {
        self.n += 1;
        self.sw += w;
        self.swy += w * y;
        self.sw2 += w * w;
        self.sw2y += w * w * y;
        self.sw2y2 += w * w * y * y;
    }

    pub fn merge(&mut self, o: &RatioAcc) {
        self.n += o.n;
        self.sw += o.sw;
        self.swy += o.swy;
        self.sw2 += o.sw2;
        self.sw2y += o.sw2y;
        self.sw2y2 += o.sw2y2;
    }

    pub fn value(&self) -> f64 {
        self.swy / self.sw
    }

    pub fn stderr(&self) -> f64 {
        let r = self.value();
        let num = self.sw2y2 - 2.0 * r * self.sw2y + r * r * self.sw2;
        (num.max(0.0)).sqrt() / self.sw
    }

    /// Kish effective sample size.
    pub fn ess(&self) -> f64 {
        self.sw * self.sw / self.sw2
    }
}

/// Weighted Kolmogorov-Smirnov distance between the weighted empirical law
/// of `xs` and the continuous CDF `cdf`, together with the effective sample
/// size used to calibrate it.
pub fn weighted_ks<F: Fn(f64) -> f64>(xs: &[f64], ws: &[f64], cdf: F) -> (f64, f64) {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let total: f64 = ws.iter().sum();
    let sq: f64 = ws.iter().map(|w| w * w).sum();
    let mut acc = 0.0;
    let mut d: f64 = 0.0;
    for &i in &idx {
        let f = cdf(xs[i]);
        d = d.max((f - acc / total).abs());
        acc += ws[i];
        d = d.max((f - acc / total).abs());
    }
    (d, total * total / sq)
}

/// Asymptotic one-sample KS critical value at level `level`.
pub fn ks_critical(n_eff: f64, level: f64) -> f64 {
    ((2.0 / level).ln() / 2.0).sqrt() / n_eff.sqrt()
}
