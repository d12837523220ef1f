//! Verdict and trend reports.

use crate::volume::Estimate;

/// Number of combined standard errors a margin must clear.
pub const SIGMA_LEVEL: f64 = 3.0;

/// Reports whose three-sigma band exceeds this fraction of the compared
/// values cannot tell a real gap from noise and are marked inconclusive.
pub const MAX_RELATIVE_BAND: f64 = 0.1;

/// Relative rounding floor on the margin error of deterministic comparisons.
pub const ROUNDING_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Confirmed,
    EqualityConsistent,
    Inconclusive,
    Violation,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Confirmed => "confirmed",
            Verdict::EqualityConsistent => "equality-consistent",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violation => "VIOLATION",
        }
    }

    /// Classify `margin = rhs - lhs` against its standard error.
    pub fn classify(margin: f64, stderr: f64, scale: f64) -> Verdict {
        if !margin.is_finite() || !stderr.is_finite() {
            return Verdict::Inconclusive;
        }
        let band = SIGMA_LEVEL * stderr;
        if band > MAX_RELATIVE_BAND * scale {
            Verdict::Inconclusive
        } else if margin - band > 0.0 {
            Verdict::Confirmed
        } else if margin + band < 0.0 {
            Verdict::Violation
        } else {
            Verdict::EqualityConsistent
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// `lhs <= rhs` tested by the sign of `rhs - lhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub experiment: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub margin: f64,
    pub margin_stderr: f64,
    pub verdict: Verdict,
    /// Set by the runner once the resolved configuration is known.
    pub config_hash: Option<String>,
}

impl ComparisonReport {
    pub fn new(experiment: &str, lhs: Estimate, rhs: Estimate) -> Self {
        let margin = rhs.value - lhs.value;
        let scale = lhs.value.abs().max(rhs.value.abs());
        let propagated = lhs.total_error().hypot(rhs.total_error());
        let margin_stderr = propagated.max(ROUNDING_FLOOR * scale);
        Self {
            experiment: experiment.to_string(),
            verdict: Verdict::classify(margin, margin_stderr, scale),
            lhs,
            rhs,
            margin,
            margin_stderr,
            config_hash: None,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.lhs.value / self.rhs.value
    }

    /// Standard error of [`ratio`](Self::ratio) to first order.
    pub fn ratio_stderr(&self) -> f64 {
        self.ratio() * self.lhs.relative_error().hypot(self.rhs.relative_error())
    }

    pub fn z_score(&self) -> f64 {
        self.margin / self.margin_stderr
    }
}

/// A sequence of estimates indexed by a parameter, optionally compared with a
/// target value.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub study: String,
    pub parameter: String,
    pub params: Vec<f64>,
    pub values: Vec<Estimate>,
    pub target: Option<Estimate>,
    pub target_provenance: String,
    /// Signed relative errors `(value - target) / target`.
    pub errors: Vec<f64>,
    pub error_stderrs: Vec<f64>,
    /// `|error|` nonincreasing up to one combined standard error per step.
    pub monotone: bool,
    pub final_relative_error: Option<f64>,
    /// Growth flag for boundedness probes: `Some(true)` when the values grow
    /// beyond their confidence slack.
    pub growth: Option<bool>,
}

impl TrendReport {
    /// Report of `values` against `target`.
    pub fn against_target(
        study: &str,
        parameter: &str,
        params: Vec<f64>,
        values: Vec<Estimate>,
        target: Estimate,
        target_provenance: &str,
    ) -> Self {
        let t = target.value;
        let st = target.total_error();
        let errors: Vec<f64> = values.iter().map(|v| (v.value - t) / t).collect();
        let error_stderrs: Vec<f64> = values
            .iter()
            .map(|v| v.total_error().hypot(v.value / t * st) / t.abs())
            .collect();
        let monotone = errors.windows(2).zip(error_stderrs.windows(2)).all(|(e, s)| {
            e[1].abs() <= e[0].abs() + s[0].hypot(s[1])
        });
        Self {
            study: study.to_string(),
            parameter: parameter.to_string(),
            final_relative_error: errors.last().map(|e| e.abs()),
            params,
            values,
            target: Some(target),
            target_provenance: target_provenance.to_string(),
            errors,
            error_stderrs,
            monotone,
            growth: None,
        }
    }

    /// Report of a sequence that should stay bounded; growth is flagged when
    /// the last value exceeds the first by more than three combined standard
    /// errors and by more than 25%.
    pub fn boundedness(study: &str, parameter: &str, params: Vec<f64>, values: Vec<Estimate>) -> Self {
        let growth = match (values.first(), values.last()) {
            (Some(a), Some(b)) => {
                let band = SIGMA_LEVEL * a.total_error().hypot(b.total_error());
                b.value - a.value > band && b.value > 1.25 * a.value
            }
            _ => false,
        };
        Self {
            study: study.to_string(),
            parameter: parameter.to_string(),
            params,
            values,
            target: None,
            target_provenance: String::new(),
            errors: Vec::new(),
            error_stderrs: Vec::new(),
            monotone: true,
            final_relative_error: None,
            growth: Some(growth),
        }
    }

    /// Whether the 95% intervals of the last value and the target overlap.
    pub fn final_ci_overlaps(&self) -> bool {
        match (self.values.last(), &self.target) {
            (Some(v), Some(t)) => v.ci95.0 <= t.ci95.1 && t.ci95.0 <= v.ci95.1,
            _ => false,
        }
    }
}
