//! Rearrangement, ball-flattening and polar-measure comparisons.

use crate::bodies::SupportBody;
use crate::densities::{ball_flatten, rearrange, Density};
use crate::error::{invalid, Error, Result};
use crate::experiments::functional::{
    check_functional, functional_volume, ColumnLaw, Functional, Mode, MIN_TRIALS,
};
use crate::experiments::report::ComparisonReport;
use crate::numerics::constants::unit_ball_volume;
use crate::numerics::rng::{par_blocks, RngStream};
use crate::numerics::sampling::{ball_point, fill_gaussian};
use crate::numerics::stats::MeanAcc;
use crate::volume::Estimate;

fn map_law(law: &ColumnLaw, op: fn(&Density) -> Result<Density>) -> Result<ColumnLaw> {
    Ok(match law {
        ColumnLaw::Iid(f) => ColumnLaw::Iid(op(f)?),
        ColumnLaw::PerColumn(fs) => {
            ColumnLaw::PerColumn(fs.iter().map(op).collect::<Result<Vec<_>>>()?)
        }
    })
}

fn compare(
    name: &str,
    law: &ColumnLaw,
    other: &ColumnLaw,
    functional: &Functional,
    mode: &Mode,
    stream: &RngStream,
) -> Result<ComparisonReport> {
    let lhs = functional_volume(law, functional, mode, &stream.named("lhs"))?;
    let rhs = functional_volume(other, functional, mode, &stream.named("rhs"))?;
    Ok(ComparisonReport::new(name, lhs, rhs))
}

/// `|K(f)|` against `|K(f*)|` (or the expected volumes of the empirical
/// bodies of `F` and `F^#`), each side on its own random stream.
pub fn rearrangement_inequality(
    law: &ColumnLaw,
    functional: &Functional,
    mode: &Mode,
    stream: &RngStream,
) -> Result<ComparisonReport> {
    check_functional(law.dim(), functional, mode)?;
    let star = map_law(law, rearrange)?;
    compare("rearrangement", law, &star, functional, mode, stream)
}

/// `|K(f)|` against `|K(g)|` with `g` the uniform density on the centred ball
/// of height `sup f`. Every body `C` must be unconditional.
pub fn ball_flattening_inequality(
    law: &ColumnLaw,
    functional: &Functional,
    mode: &Mode,
    stream: &RngStream,
) -> Result<ComparisonReport> {
    check_functional(law.dim(), functional, mode)?;
    match functional {
        Functional::DualCentroid { bodies, p } => {
            if *p > 1.0 {
                return Err(Error::Hypothesis(format!(
                    "ball flattening needs p <= 1, got {p}"
                )));
            }
            if bodies.iter().any(|c| !c.is_unconditional()) {
                return Err(Error::Hypothesis(
                    "ball flattening needs every body C to be unconditional".into(),
                ));
            }
        }
        Functional::LpIntersection { .. } => {}
        Functional::Intersection => {
            return Err(Error::Unsupported(
                "ball flattening is not available for the intersection body".into(),
            ))
        }
    }
    let flat = map_law(law, ball_flatten)?;
    compare("ball-flattening", law, &flat, functional, mode, stream)
}

/// Radial measures with decreasing density supported by [`cefpp_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarMeasure {
    Gaussian,
    /// Lebesgue measure restricted to the unit ball.
    LebesgueBall,
}

impl std::str::FromStr for PolarMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(PolarMeasure::Gaussian),
            "lebesgue-on-ball" => Ok(PolarMeasure::LebesgueBall),
            other => Err(invalid(
                "measure",
                format!("unsupported measure {other:?}; expected gaussian or lebesgue-on-ball"),
            )),
        }
    }
}

/// Which law replaces `F` on the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CefppVariant {
    /// `F^# = (f_i^*)`.
    Rearranged,
    /// `g_i = ||f_i||_inf 1_{r_i B}`; needs `C` unconditional.
    BallFlattened,
}

/// `E nu((XC)°)` by membership counting: `points` draws from `nu` (or from
/// the uniform law on the unit ball) per draw of `X`, `trials` draws of `X`.
pub fn polar_measure(
    law: &ColumnLaw,
    c: &SupportBody,
    measure: PolarMeasure,
    trials: usize,
    points: usize,
    stream: &RngStream,
) -> Result<Estimate> {
    let n = law.dim();
    let big_n = c.dim();
    if let ColumnLaw::PerColumn(fs) = law {
        if fs.len() != big_n {
            return Err(Error::DimensionMismatch {
                expected: big_n,
                got: fs.len(),
            });
        }
    }
    if trials < 2 || points == 0 {
        return Err(invalid("trials", "need at least 2 trials and 1 point per trial"));
    }
    let scale = match measure {
        PolarMeasure::Gaussian => 1.0,
        PolarMeasure::LebesgueBall => unit_ball_volume(n)?,
    };
    let widths = [big_n];
    let parts = par_blocks(stream, trials, |rng, start, end| {
        let mut acc = MeanAcc::default();
        let mut y = vec![0.0; n];
        for _ in start..end {
            let x = match law {
                ColumnLaw::Iid(f) => crate::bodies::BlockSampleMatrix::sample(f, &widths, rng),
                ColumnLaw::PerColumn(fs) => {
                    crate::bodies::BlockSampleMatrix::sample_family(fs, &widths, rng)
                }
            }?;
            let mut hits = 0usize;
            for _ in 0..points {
                match measure {
                    PolarMeasure::Gaussian => fill_gaussian(rng, &mut y),
                    PolarMeasure::LebesgueBall => y.copy_from_slice(&ball_point(rng, n)),
                }
                if c.h_image(x.as_flat(), &y) <= 1.0 {
                    hits += 1;
                }
            }
            acc.push(scale * hits as f64 / points as f64);
        }
        Ok(acc)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    let acc = MeanAcc::merged(&parts);
    let total = (trials * points) as u64;
    Ok(Estimate::new(acc.mean, acc.stderr(), 0.0, total, "membership").with_seed(*stream))
}

/// `E nu((XC)°)` against `E nu((X^# C)°)`, or against the ball-flattened
/// family when `variant` asks for it.
pub fn cefpp_probe(
    law: &ColumnLaw,
    c: &SupportBody,
    measure: PolarMeasure,
    variant: CefppVariant,
    trials: usize,
    points: usize,
    stream: &RngStream,
) -> Result<ComparisonReport> {
    if trials < MIN_TRIALS {
        return Err(invalid(
            "trials",
            format!("need at least {MIN_TRIALS} trials, got {trials}"),
        ));
    }
    let other = match variant {
        CefppVariant::Rearranged => map_law(law, rearrange)?,
        CefppVariant::BallFlattened => {
            if !c.is_unconditional() {
                return Err(Error::Hypothesis(
                    "the ball-flattened comparison needs C unconditional".into(),
                ));
            }
            map_law(law, ball_flatten)?
        }
    };
    let lhs = polar_measure(law, c, measure, trials, points, &stream.named("lhs"))?;
    let rhs = polar_measure(&other, c, measure, trials, points, &stream.named("rhs"))?;
    Ok(ComparisonReport::new("cefpp", lhs, rhs))
}
