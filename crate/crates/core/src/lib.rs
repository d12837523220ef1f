pub mod bodies;
pub mod centroid;
pub mod densities;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod volume;

pub use error::{Error, Result};
