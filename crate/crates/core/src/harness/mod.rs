//! Experiment catalog, run configuration, statistics and report output.

pub mod config;
pub mod experiments;
pub mod report;
pub mod stats;

pub use config::{Format, RunConfig};
pub use experiments::{run_experiment, CATALOG};
pub use report::{Check, ExperimentReport, Relation};
pub use stats::{chi_square, chi_square_homogeneity, ChiSquare, MeanEstimate};
