//! Experiment configuration, runners, and file output for the `vlp` CLI.

pub mod config;
pub mod experiments;
pub mod io;

pub use config::{ExperimentConfig, ExperimentKind, SweepSpec};
