//! Equivalence tests for symmetry, homogeneity and independence built on weighted
//! L2 distances between characteristic functions.
//!
//! The null hypothesis is that the distance is at least a threshold `Δ`; rejecting it
//! certifies that the data are close to the target structure. See [`decision::run_test`]
//! for the one-call entry point and [`thresholds`] for ways to pick `Δ`.

pub mod data;
pub mod decision;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod quadrature;
pub mod samplers;
pub mod sim;
mod sum;
pub mod thresholds;
pub mod variance;

pub use data::{PairedSample, SampleMatrix, TwoSample};
pub use decision::{decide, run_test, Decision, EquivalenceConfig, Hypothesis, TestReport};
pub use error::{Error, Result};
pub use kernels::{KernelFamily, KernelSpec};
