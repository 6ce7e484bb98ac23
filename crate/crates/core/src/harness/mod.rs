//! Batch experiment driver.

pub mod batch;
pub mod config;

pub use batch::{generate_truth, run_batch, run_trial, BatchReport, TrialOutcome};
pub use config::{load_config_file, merge, parse_config_text, ConfigMap, RunConfig, TruthSpec};
