//! Subcommand entry points: run the sweep, write the CSVs and the manifest.

use std::path::{Path, PathBuf};

use molar::data::{ingest_csv, split_tasks, write_outputs, IngestConfig};

use crate::config::{ExperimentConfig, Kind};
use crate::error::{CliError, Result};
use crate::runner;

fn resolve_out(config: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn expect_kind(config: &ExperimentConfig, kind: Kind) -> Result<()> {
    if config.kind != kind {
        return Err(CliError::Config(format!(
            "config kind is `{}`, expected `{kind}`",
            config.kind
        )));
    }
    Ok(())
}

pub fn regress(config: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    expect_kind(config, Kind::Regress)?;
    let started = std::time::SystemTime::now();
    let dir = resolve_out(config, out);
    let output = runner::run_regress(config)?;
    let rows_path = dir.join("regress.csv");
    let summary_path = dir.join("regress_summary.csv");
    runner::write_csv(&rows_path, &output.rows)?;
    runner::write_csv(&summary_path, &output.summary)?;
    let outputs = vec![rows_path, summary_path];
    runner::write_manifest(&dir, config, started, &outputs)?;
    Ok(outputs)
}

pub fn bandit(config: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    expect_kind(config, Kind::Bandit)?;
    let started = std::time::SystemTime::now();
    let dir = resolve_out(config, out);
    let results = runner::run_bandit(config)?;
    let seeds = config.seeds.expand();
    let hash = config.hash();
    let (traces, summaries, refits) = runner::bandit_rows(&results, &seeds, &hash);
    let traces_path = dir.join("traces.csv");
    let summary_path = dir.join("bandit_summary.csv");
    let refits_path = dir.join("refits.csv");
    runner::write_csv(&traces_path, &traces)?;
    runner::write_csv(&summary_path, &summaries)?;
    runner::write_csv(&refits_path, &refits)?;
    let outputs = vec![traces_path, summary_path, refits_path];
    runner::write_manifest(&dir, config, started, &outputs)?;
    Ok(outputs)
}

pub fn recover(config: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    expect_kind(config, Kind::Recover)?;
    let started = std::time::SystemTime::now();
    let dir = resolve_out(config, out);
    let rows = runner::run_recover(config)?;
    let path = dir.join("recover.csv");
    runner::write_csv(&path, &rows)?;
    let outputs = vec![path];
    runner::write_manifest(&dir, config, started, &outputs)?;
    Ok(outputs)
}

pub fn ingest(config: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    expect_kind(config, Kind::Ingest)?;
    let started = std::time::SystemTime::now();
    let dir = resolve_out(config, out);
    let section = config
        .ingest
        .as_ref()
        .ok_or_else(|| CliError::Config("ingest section missing".into()))?;
    let ingest_config = IngestConfig {
        correlation_cutoff: section.correlation_cutoff,
        cv_folds: section.cv_folds,
        split_fractions: section.fractions,
        standardize: section.standardize,
        response_column: section.response_column.clone(),
        task_column: section.task_column.clone(),
    };
    let table = ingest_csv(&section.input, &ingest_config).map_err(|e| match e {
        molar::Error::MalformedCsv(_) | molar::Error::MissingColumn(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Run(other.to_string()),
    })?;

    let processed = dir.join("processed");
    write_outputs(&table, &processed)?;
    let mut outputs = vec![processed];

    // seed for the split comes from the first configured seed
    let seed = config.seeds.expand()[0];
    let (train, val, test) = split_tasks(&table, section.fractions, seed)?;
    for (name, part) in [("train", &train), ("validation", &val), ("test", &test)] {
        if part.tasks.is_empty() {
            continue;
        }
        let part_dir = dir.join(name);
        write_outputs(part, &part_dir)?;
        outputs.push(part_dir);
    }
    runner::write_manifest(&dir, config, started, &outputs)?;
    Ok(outputs)
}

pub fn tune(config: &ExperimentConfig, out: Option<&Path>) -> Result<(Vec<PathBuf>, f64)> {
    expect_kind(config, Kind::Tune)?;
    let started = std::time::SystemTime::now();
    let dir = resolve_out(config, out);
    let output = runner::run_tune(config)?;
    let path = dir.join("tune.csv");
    runner::write_csv(&path, &output.rows)?;
    let outputs = vec![path];
    runner::write_manifest(&dir, config, started, &outputs)?;
    Ok((outputs, output.chosen))
}
