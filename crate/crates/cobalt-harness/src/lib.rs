//! Benchmark harness for the cobalt optimizer: experiment execution with
//! reproducible artifacts, baseline algorithms, information-gain
//! diagnostics, and the theory-validation suites.

pub mod baselines;
pub mod config;
pub mod experiment;
pub mod info_gain;
pub mod validate;
