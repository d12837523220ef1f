//! Constants, samplers, quadrature and reproducible random streams.

pub mod constants;
pub mod quad;
pub mod rng;
pub mod sampling;
pub mod sphere;
pub mod stats;

pub use constants::{gaussian_neg_moment, nt_constants, unit_ball_volume, NtConstants};
pub use rng::{par_blocks, RngStream, BLOCK};
pub use sampling::{sample_positive_stable, sample_tilted_weight, TiltedStableDraw};
pub use sphere::{sphere_quadrature, SphereGrid, SphereMode};
pub use stats::{MeanAcc, RatioAcc};
