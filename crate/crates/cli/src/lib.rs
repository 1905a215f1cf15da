//! Sweep runner and analysis tools behind the `rpd` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod config;
pub mod error;
pub mod records;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use sweep::{run_sweep, SweepSummary};
