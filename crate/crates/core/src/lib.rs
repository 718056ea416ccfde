//! Multitask statistical learning under sparse heterogeneity.
//!
//! The crate provides:
//! - dense least squares and l1-penalized solvers with robust coordinate-wise
//!   aggregation ([`ols`], [`lasso`], [`aggregate`]);
//! - the two-stage median-shrinkage multitask estimator and its baselines
//!   ([`molar`]);
//! - an asynchronous multitask contextual-bandit simulator with batched
//!   greedy policies and exact regret accounting ([`bandit`]);
//! - an equality-constrained l1 solver for noiseless high-dimensional
//!   multitask recovery ([`recovery`]);
//! - synthetic data generation and a tabular ingestion pipeline ([`data`]).

pub mod aggregate;
pub mod bandit;
pub mod data;
pub mod error;
pub mod lasso;
pub mod molar;
pub mod ols;
pub mod recovery;
pub mod task;

pub use aggregate::{coordinatewise_median, trimmed_mean};
pub use error::{Error, Result};
pub use lasso::{lasso_fit, soft_shrink, LassoConfig, LassoFit};
pub use molar::{
    molar_fit, pooled_ols_fit, robust_multitask_fit, select_tau, threshold_schedule, MolarConfig,
    MolarOption, MolarResult, NoiseScale, RobustMultitaskConfig, TauSelection, ThresholdSchedule,
};
pub use ols::{ols_fit, OlsFit, TaskSummary};
pub use task::TaskDataset;
