//! Experiment harness for `twlip-core`: JSON configs, probe sweeps with
//! schedule checks, reports and plot data.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::{ExperimentConfig, Plan};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentReport};
pub use output::emit_plot_data;
