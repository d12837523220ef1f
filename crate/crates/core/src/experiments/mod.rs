//! Statistical checks of the rearrangement inequalities and convergence studies.
//!
//! Every comparison estimates both sides on independent streams and renders a
//! three-sigma [`Verdict`].

pub mod busemann;
pub mod functional;
pub mod inequality;
pub mod limits;
pub mod report;

pub use busemann::{busemann_body, busemann_ratio};
pub use functional::{
    block_bodies, check_functional, empirical_volume, exact_volume, functional_volume,
    integer_ratio, ColumnLaw, Functional, Mode, MIN_MC_POINTS, MIN_TRIALS,
};
pub use inequality::{
    ball_flattening_inequality, cefpp_probe, polar_measure, rearrangement_inequality,
    CefppVariant, PolarMeasure,
};
pub use limits::{convergence_study, moment_bound_probe, ProbeConfig, StudySpec};
pub use report::{ComparisonReport, TrendReport, Verdict, SIGMA_LEVEL};
