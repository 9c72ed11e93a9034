//! Density-matrix simulation of noisy quantum feature maps and the four
//! kernel and variational classifiers evaluated on top of them.

pub mod channels;
pub mod classifiers;
pub mod data;
pub mod dmcore;
pub mod error;
pub mod featuremaps;
pub mod harness;
pub mod kernels;
pub mod simulator;

pub use error::{Error, Result};
