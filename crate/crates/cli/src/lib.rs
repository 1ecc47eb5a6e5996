//! Experiment runner behind the `evodyn` binary.

pub mod config;
pub mod report;
pub mod run;
