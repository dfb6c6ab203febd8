//! Optimization algorithms as Markov kernels over their own history,
//! with sampling and consistency tail estimators and an exact finite-space oracle.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algorithm;
pub mod algorithms;
pub mod error;
pub(crate) mod math;
pub mod metrics;
pub mod objectives;
pub mod oracle;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
