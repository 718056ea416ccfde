//! Contract tests for the experiment runner: determinism, collapse
//! identities, parallel/serial equivalence, CSV round-trips, and the
//! binary's exit codes.

use std::path::PathBuf;
use std::process::Command;

use molar_cli::config::ExperimentConfig;
use molar_cli::runner::{self, RegressRow};

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("molar_cli_{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_regress(methods: &str, sigma: f64, workers: usize) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
            "kind": "regress",
            "scenario": {{"d": [6], "n": [40], "m": [4], "s": [2], "sigma": [{sigma}]}},
            "methods": [{methods}],
            "seeds": {{"base": 11, "count": 3}},
            "workers": {workers}
        }}"#
    ))
    .unwrap()
}

#[test]
fn zero_threshold_molar_equals_ols_column_for_column() {
    let config = small_regress(
        r#"{"name": "ols"}, {"name": "molar", "c_gamma": 0.0, "sigma_mode": "known"}"#,
        0.1,
        1,
    );
    let out = runner::run_regress(&config).unwrap();
    let ols: Vec<&RegressRow> = out.rows.iter().filter(|r| r.method == "ols").collect();
    let molar: Vec<&RegressRow> = out.rows.iter().filter(|r| r.method == "molar").collect();
    assert_eq!(ols.len(), molar.len());
    assert!(!ols.is_empty());
    for (a, b) in ols.iter().zip(&molar) {
        assert_eq!((a.seed, a.task), (b.seed, b.task));
        assert_eq!(a.l1_error, b.l1_error);
        assert_eq!(a.l2_error, b.l2_error);
    }
}

#[test]
fn noiseless_scenario_reports_tiny_errors() {
    // exact solvers only: homogeneous tasks, zero noise, zero penalties
    let config = ExperimentConfig::from_json(
        r#"{
            "kind": "regress",
            "scenario": {"d": [5], "n": [30], "m": [3], "s": [0], "sigma": [0.0]},
            "methods": [
                {"name": "ols"},
                {"name": "pooled"},
                {"name": "lasso", "c_lambda": 0.0},
                {"name": "molar", "c_gamma": 1.4, "sigma_mode": "known"},
                {"name": "robust_multitask", "c_lambda": 0.0, "trim_fraction": 0.0}
            ],
            "seeds": [3, 4]
        }"#,
    )
    .unwrap();
    let out = runner::run_regress(&config).unwrap();
    for row in &out.rows {
        assert!(
            row.l1_error <= 1e-7,
            "{} seed {} task {}: {}",
            row.method,
            row.seed,
            row.task,
            row.l1_error
        );
    }
}

#[test]
fn rerun_is_byte_identical_and_worker_independent() {
    let methods =
        r#"{"name": "ols"}, {"name": "molar", "c_gamma": 1.4}, {"name": "lasso", "c_lambda": 0.05}"#;
    let a = runner::run_regress(&small_regress(methods, 0.2, 1)).unwrap();
    let b = runner::run_regress(&small_regress(methods, 0.2, 1)).unwrap();
    let c = runner::run_regress(&small_regress(methods, 0.2, 4)).unwrap();

    let strip = |rows: &[RegressRow]| -> Vec<RegressRow> {
        rows.iter()
            .map(|r| RegressRow {
                wall_ms: 0,
                ..r.clone()
            })
            .collect()
    };
    assert_eq!(strip(&a.rows), strip(&b.rows));
    // worker count changes wall time only
    assert_eq!(strip(&a.rows), strip(&c.rows));
}

#[test]
fn regress_csv_round_trips() {
    let config = small_regress(r#"{"name": "ols"}"#, 0.1, 1);
    let out = runner::run_regress(&config).unwrap();
    let dir = tmp_dir("roundtrip");
    let path = dir.join("regress.csv");
    runner::write_csv(&path, &out.rows).unwrap();
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let back: Vec<RegressRow> = reader.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(back, out.rows);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn bandit_csvs_round_trip_including_empty_tau() {
    let config = small_bandit(
        r#"{"name": "olsb"}, {"name": "molarb", "c_gamma": 1.4}"#,
        2,
        2,
        "[3, 4]",
    );
    let results = runner::run_bandit(&config).unwrap();
    let seeds = config.seeds.expand();
    let hash = config.hash();
    let (traces, summaries, refits) = runner::bandit_rows(&results, &seeds, &hash);
    // olsb never records a tau, so the column exercises the empty case
    assert!(refits
        .iter()
        .any(|r| r.policy == "olsb" && r.tau.is_none()));
    let dir = tmp_dir("bandit_roundtrip");
    for (name, check) in [("traces", true), ("summary", true), ("refits", true)] {
        let path = dir.join(format!("{name}.csv"));
        match name {
            "traces" => {
                runner::write_csv(&path, &traces).unwrap();
                let back: Vec<runner::TraceRow> = csv::Reader::from_path(&path)
                    .unwrap()
                    .deserialize()
                    .map(|r| r.unwrap())
                    .collect();
                assert_eq!(back, traces);
            }
            "summary" => {
                runner::write_csv(&path, &summaries).unwrap();
                let back: Vec<runner::BanditSummaryRow> = csv::Reader::from_path(&path)
                    .unwrap()
                    .deserialize()
                    .map(|r| r.unwrap())
                    .collect();
                assert_eq!(back, summaries);
            }
            _ => {
                runner::write_csv(&path, &refits).unwrap();
                let back: Vec<runner::RefitRow> = csv::Reader::from_path(&path)
                    .unwrap()
                    .deserialize()
                    .map(|r| r.unwrap())
                    .collect();
                assert_eq!(back, refits);
            }
        }
        assert!(check);
    }
    std::fs::remove_dir_all(dir).ok();
}

fn small_bandit(policies: &str, k: usize, m: usize, seeds: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
            "kind": "bandit",
            "scenario": {{
                "d": [4], "m": [{m}], "s": [1], "sigma": [0.3],
                "t": [120], "h0": [1], "k": [{k}],
                "p_mode": [{{"linspace": {{"lo": 0.5, "hi": 1.0}}}}]
            }},
            "methods": [{policies}],
            "seeds": {seeds}
        }}"#
    ))
    .unwrap()
}

#[test]
fn single_arm_bandit_has_zero_summary_regret() {
    let config = small_bandit(r#"{"name": "olsb"}, {"name": "molarb", "c_gamma": 1.4}"#, 1, 3, "[5, 6]");
    let results = runner::run_bandit(&config).unwrap();
    for res in &results {
        for row in &res.summary.mean {
            assert!(row.iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn policies_collapse_for_single_instance() {
    let config = small_bandit(
        r#"{"name": "olsb"}, {"name": "molarb", "c_gamma": 1.4}"#,
        3,
        1,
        "[9, 10, 11]",
    );
    let results = runner::run_bandit(&config).unwrap();
    assert_eq!(results.len(), 2);
    for (a, b) in results[0].traces.iter().zip(&results[1].traces) {
        assert_eq!(a.per_instance_cumulative, b.per_instance_cumulative);
    }
}

#[test]
fn single_seed_stderr_is_zero() {
    let config = small_bandit(r#"{"name": "olsb"}"#, 2, 2, "[42]");
    let results = runner::run_bandit(&config).unwrap();
    for row in &results[0].summary.stderr {
        assert!(row.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn recover_homogeneous_noiseless_is_exact() {
    let config = ExperimentConfig::from_json(
        r#"{
            "kind": "recover",
            "scenario": {"d": [12], "n": [6], "m": [4], "s": [0]},
            "seeds": [1, 2],
            "recover": {"tolerance": 1e-10}
        }"#,
    )
    .unwrap();
    let rows = runner::run_recover(&config).unwrap();
    for row in &rows {
        assert!(row.converged);
        assert!(row.l1_error <= 1e-6, "l1 {}", row.l1_error);
        assert!(row.max_constraint_violation <= 1e-10 * 1.001);
    }
}

#[test]
fn tune_selects_the_exact_value() {
    // sigma = 0 and a grid containing 0: the zero penalty gives exact fits,
    // every positive penalty biases them, so 0 must win
    let config = ExperimentConfig::from_json(
        r#"{
            "kind": "tune",
            "scenario": {"d": [5], "n": [30], "m": [3], "s": [0], "sigma": [0.0]},
            "seeds": [7],
            "tune": {"target": {"name": "lasso", "c_lambda": 1.0}, "grid": [0.0, 0.35, 0.7]}
        }"#,
    )
    .unwrap();
    let out = runner::run_tune(&config).unwrap();
    assert_eq!(out.chosen, 0.0);

    // single-element grid returns that element
    let single = ExperimentConfig::from_json(
        r#"{
            "kind": "tune",
            "scenario": {"d": [4], "n": [20], "m": [2], "s": [1], "sigma": [0.1]},
            "seeds": [7],
            "tune": {"target": {"name": "molar", "c_gamma": 1.0}, "grid": [0.7]}
        }"#,
    )
    .unwrap();
    assert_eq!(runner::run_tune(&single).unwrap().chosen, 0.7);

    // deterministic under a fixed seed
    let again = runner::run_tune(&config).unwrap();
    assert_eq!(out.rows, again.rows);
}

// -------------------------------------------------------------------------
// binary-level checks
// -------------------------------------------------------------------------

fn write_config(dir: &std::path::Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn binary_runs_regress_and_writes_outputs() {
    let dir = tmp_dir("bin_regress");
    let config = write_config(
        &dir,
        "config.json",
        r#"{
            "kind": "regress",
            "scenario": {"d": [4], "n": [20], "m": [2], "s": [1], "sigma": [0.1]},
            "methods": [{"name": "ols"}],
            "seeds": [1]
        }"#,
    );
    let out = dir.join("results");
    let status = Command::new(env!("CARGO_BIN_EXE_molar"))
        .args(["regress", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("regress.csv").exists());
    assert!(out.join("regress_summary.csv").exists());
    let manifest = std::fs::read_to_string(out.join("run_manifest.json")).unwrap();
    assert!(manifest.contains("config_hash"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn binary_exit_codes() {
    let dir = tmp_dir("bin_exit");
    // config error: unknown key
    let bad = write_config(&dir, "bad.json", r#"{"kind": "regress", "bogus": 1}"#);
    let status = Command::new(env!("CARGO_BIN_EXE_molar"))
        .args(["regress", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // numerical failure: n < d makes every task singular
    let singular = write_config(
        &dir,
        "singular.json",
        r#"{
            "kind": "regress",
            "scenario": {"d": [6], "n": [2], "m": [2], "s": [1], "sigma": [0.1]},
            "methods": [{"name": "ols"}],
            "seeds": [1]
        }"#,
    );
    let status = Command::new(env!("CARGO_BIN_EXE_molar"))
        .args(["regress", "--config"])
        .arg(&singular)
        .arg("--out")
        .arg(dir.join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn binary_ingest_pipeline_end_to_end() {
    let dir = tmp_dir("bin_ingest");
    let mut csv_body = String::from("country,x1,x2,score\n");
    let mut state = 9u64;
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    for i in 0..60 {
        let x1 = next();
        let x2 = next();
        let y = 2.0 * x1 - x2 + 0.01 * next();
        csv_body.push_str(&format!("c{},{x1},{x2},{y}\n", i % 3));
    }
    let data = write_config(&dir, "data.csv", &csv_body);
    let config = write_config(
        &dir,
        "config.json",
        &format!(
            r#"{{
                "kind": "ingest",
                "seeds": [5],
                "ingest": {{
                    "input": {:?},
                    "task_column": "country",
                    "response_column": "score",
                    "cv_folds": 3,
                    "fractions": [0.6, 0.2, 0.2]
                }}
            }}"#,
            data.display()
        ),
    );
    let out = dir.join("results");
    let status = Command::new(env!("CARGO_BIN_EXE_molar"))
        .args(["ingest", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("processed/provenance.json").exists());
    assert!(out.join("processed/task_c0.csv").exists());
    assert!(out.join("train/task_c0.csv").exists());
    assert!(out.join("test/task_c2.csv").exists());
    std::fs::remove_dir_all(dir).ok();
}
