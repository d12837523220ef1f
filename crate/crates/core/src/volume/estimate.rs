//! Volume estimates and their CSV form.

use crate::numerics::rng::RngStream;

/// z-value of a two-sided 95% normal interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Monte Carlo standard error; 0 for deterministic quadrature.
    pub stderr: f64,
    /// Discretisation error estimate of deterministic quadrature, or 0.
    pub quad_error: f64,
    pub n_samples: u64,
    pub ci95: (f64, f64),
    pub seed: Option<RngStream>,
    pub method: String,
    /// Radial nodes dropped because rho was infinite there.
    pub dropped: usize,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64, quad_error: f64, n_samples: u64, method: &str) -> Self {
        let half = Z95 * stderr.hypot(quad_error);
        Self {
            value,
            stderr,
            quad_error,
            n_samples,
            ci95: ((value - half).max(0.0).min(value), value + half),
            seed: None,
            method: method.to_string(),
            dropped: 0,
        }
    }

    pub fn deterministic(value: f64, quad_error: f64, nodes: usize, method: &str) -> Self {
        Self::new(value, 0.0, quad_error, nodes as u64, method)
    }

    pub fn with_seed(mut self, seed: RngStream) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Multiply value and errors by a positive constant.
    pub fn scaled(&self, c: f64) -> Self {
        let mut e = Self::new(
            self.value * c,
            self.stderr * c,
            self.quad_error * c,
            self.n_samples,
            &self.method,
        );
        e.seed = self.seed;
        e.dropped = self.dropped;
        e
    }

    /// Standard error and quadrature error combined in quadrature.
    pub fn total_error(&self) -> f64 {
        self.stderr.hypot(self.quad_error)
    }

    pub fn relative_error(&self) -> f64 {
        self.total_error() / self.value.abs()
    }

    /// Whether two estimates agree within `k` combined total errors.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        let band = self.total_error().hypot(other.total_error());
        (self.value - other.value).abs() <= k * band
    }

    pub fn seed_label(&self) -> String {
        match self.seed {
            Some(s) => s.master_seed.to_string(),
            None => String::new(),
        }
    }

    pub const CSV_HEADER: &'static str = "method,value,stderr,n_samples,seed,wall_time";

    /// One row matching [`Estimate::CSV_HEADER`]; an absent wall time leaves
    /// the column empty.
    pub fn csv_row(&self, wall_time: Option<f64>) -> String {
        format!(
            "{},{:.12e},{:.6e},{},{},{}",
            self.method,
            self.value,
            self.total_error(),
            self.n_samples,
            self.seed_label(),
            wall_time.map(|t| format!("{t:.3}")).unwrap_or_default()
        )
    }
}
