//! Benchmark harness for the seasonal forecasting models: data loading,
//! experiment configuration, the model-matrix runner and report output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
mod error;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, Family, Model, PsoPreset};
pub use error::{BenchError, Result};
pub use report::{ReportFormat, ReportRow};
pub use runner::{run_experiment, Experiment, ModelRun};
