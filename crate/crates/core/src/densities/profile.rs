//! Radial step profiles: `f(x) = values[k]` for `radii[k-1] <= |x| < radii[k]`.

use crate::error::{invalid, Result};
use crate::numerics::constants::ln_unit_ball_volume;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(invalid("radii", "radii and values must be nonempty and of equal length"));
        }
        let mut prev = 0.0;
        for &r in &radii {
            if !(r > prev) || !r.is_finite() {
                return Err(invalid("radii", "radii must be finite and strictly increasing from 0"));
            }
            prev = r;
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("values", "values must be finite and nonnegative"));
        }
        Ok(Self { radii, values })
    }

    pub fn outer(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn inner(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.radii[k - 1]
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let k = self.radii.partition_point(|&rk| rk <= r);
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn shell_volume(&self, k: usize, n: usize) -> f64 {
        let w = ln_unit_ball_volume(n).exp();
        w * (self.radii[k].powi(n as i32) - self.inner(k).powi(n as i32))
    }

    pub fn mass(&self, n: usize) -> f64 {
        (0..self.radii.len())
            .map(|k| self.values[k] * self.shell_volume(k, n))
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            radii: self.radii.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Volume of `{f > t}`.
    pub fn level_volume(&self, t: f64, n: usize) -> f64 {
        (0..self.radii.len())
            .filter(|&k| self.values[k] > t)
            .map(|k| self.shell_volume(k, n))
            .sum()
    }

    /// Equimeasurable decreasing rearrangement: shells sorted by value,
    /// zero shells dropped, radii recomputed from accumulated volume.
    pub fn rearranged(&self, n: usize) -> Self {
        let mut shells: Vec<(f64, f64)> = (0..self.radii.len())
            .filter(|&k| self.values[k] > 0.0)
            .map(|k| (self.values[k], self.shell_volume(k, n)))
            .collect();
        shells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        merge_shells(shells, n)
    }
}

/// Build a centred decreasing profile from `(value, volume)` pairs already
/// sorted by decreasing value; equal values are merged.
pub fn merge_shells(shells: Vec<(f64, f64)>, n: usize) -> RadialProfile {
    let w = ln_unit_ball_volume(n).exp();
    let mut radii = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut vol = 0.0;
    for (v, dv) in shells {
        if dv <= 0.0 {
            continue;
        }
        vol += dv;
        let r = (vol / w).powf(1.0 / n as f64);
        if values.last() == Some(&v) {
            *radii.last_mut().unwrap() = r;
        } else {
            radii.push(r);
            values.push(v);
        }
    }
    if radii.is_empty() {
        radii.push(1.0);
        values.push(0.0);
    }
    RadialProfile { radii, values }
}

/// `(x)_+^e` with the convention `(x)_+^0 = 1` for `x > 0`.
pub(crate) fn pos_pow(x: f64, e: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}
