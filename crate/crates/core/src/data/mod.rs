//! Synthetic data generation and tabular ingestion.

mod ingest;
mod synth;

pub use ingest::{
    ingest_csv, split_tasks, write_outputs, IngestConfig, MultiTaskTable, Provenance, TaskTable,
};
pub use synth::{
    gen_bandit_world, gen_regression_tasks, perturb_sparse, sample_sphere, ActivationSpec,
    BanditWorldSpec, NoiseFamily, RegressionTruth, SynthRegressionSpec, TaskSizes,
};
