//! Experiment runner for the `spatial-qudit` simulator.
//!
//! Resolves JSON configs into scenario cells, runs every state of a sweep on
//! a rayon pool, and writes CSV records, JSON summaries and mask images.

pub mod config;
pub mod error;
pub mod masks;
pub mod output;
pub mod runner;

pub use config::{ConfigFile, ExperimentConfig, MethodChoice, Scenario, StateSource, Target};
pub use error::{Result, RunFailure, SimError};
pub use output::{emit_results, histogram, OutputFormat, CSV_HEADER};
pub use runner::{
    run, run_bloch_sweep, run_period_sweep, run_qudit_histogram, FidelityRecord, ScenarioOutput,
};
