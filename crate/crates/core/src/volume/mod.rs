//! Volume estimators for star bodies and the mixture and indicator
//! representations used to cross-check them.

pub mod estimate;
pub mod indicator;
pub mod mixture;
pub mod radial;

pub use estimate::Estimate;
pub use indicator::{
    compositions, gaussian_measure_polar, indicator_rep_check, multinomial, IndicatorCase,
    IndicatorConfig, IndicatorReport,
};
pub use mixture::{
    numerical_rank, nt_generalized_volume, nt_mixture_volume, polar_volume_determinant,
    InnerVolume, MixtureConfig, MIN_MIXTURE_BUDGET,
};
pub use radial::{
    gaussian_volume, volume_exponential, volume_exponential_direct, volume_gaussian,
    volume_radial, volume_radial_at, EstimatorRegistry, GaussianMode, VolumeEstimator, VolumePlan,
};
