//! Experiment configuration, sweeps and statistical self-checks on top of
//! `qstoch-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod sweep;
pub mod verify;

pub use config::{ConfigError, ExperimentConfig};
pub use qstoch_core;
pub use sweep::{run_sweep, run_sweep_to_files, Summary, SweepError, SweepOptions, SweepOutput, CSV_HEADER};
pub use verify::{run_suite, Check, Report, Suite};
