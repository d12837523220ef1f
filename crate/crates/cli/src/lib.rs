//! Command-line front end: config-driven runs and one-shot computations.

pub mod config;
pub mod oneshot;
pub mod registry;
pub mod run;

pub use config::{Catalog, RunConfig};
pub use registry::{Experiment, ExperimentRegistry, Outcome, Plan};
pub use run::{run, RunOptions, RunOutcome};
