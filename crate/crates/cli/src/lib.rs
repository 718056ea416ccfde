//! Experiment runner: configuration loading, seeded sweeps over
//! (scenario x method x seed) grids, CSV emission, and tuning recipes.

pub mod commands;
pub mod config;
pub mod error;
pub mod runner;
pub mod seeds;

pub use config::{ExperimentConfig, Kind, MethodSpec, PMode, Scenario, SeedSpec};
pub use error::{CliError, Result};
