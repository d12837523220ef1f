//! Convex bodies by support function, star bodies by radial function, and the
//! block-matrix machinery linking them.

pub mod blocks;
pub mod star;
pub mod support;

pub use blocks::{polar_membership, power_gauge, BlockSampleMatrix, GeneralizedBall};
pub use star::{BallBody, FnBody, PolarBody, StarBody};
pub use support::{
    block_support, ellipsoid_polar_radial, make_support_body, polar_radial, SupportBody,
    SupportBodySpec,
};
