//! Configuration and orchestration behind the `quench-thermo` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

pub use config::{Experiment, RunConfig, Violation};
pub use run::{load, run, CliError, Manifest};
