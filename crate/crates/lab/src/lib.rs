//! Experiment runner for `hdickman-core`: configuration and report files,
//! the on-disk prime cache, CSV export and deterministic parallel batches.

pub mod cache;
pub mod config;
mod error;
pub mod experiments;
pub mod export;
pub mod parallel;
pub mod report;

pub use config::{ExperimentConfig, ExperimentName};
pub use error::LabError;
pub use experiments::run;
pub use report::ExperimentReport;

/// Crate version stamped into every report.
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");
