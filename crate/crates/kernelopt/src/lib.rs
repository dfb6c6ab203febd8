//! Configuration-driven experiments on top of `kernelopt-core`: tail
//! curves, the adversarial bump pipeline, the finite-space oracle, the
//! inclusion check and ball covers, with CSV, plot-data and report outputs.

pub mod build;
pub mod commands;
pub mod config;
pub mod exec;
pub mod output;

pub use commands::{run, Outcome, RunContext};
pub use config::{ExperimentConfig, Mode};
pub use exec::Runner;
