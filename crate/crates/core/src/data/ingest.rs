//! Tabular ingestion: missing-value dummies, cross-validated l1 feature
//! selection, sequential correlation filtering, optional standardization,
//! and per-task splits. Every transformation is recorded in a provenance
//! sidecar so a processed table can be reproduced from its source.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{lasso_fit_from_stats, LassoConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestConfig {
    /// Absolute Pearson correlation above which a later column is dropped.
    pub correlation_cutoff: f64,
    pub cv_folds: usize,
    /// (train, validation, test); nonnegative, summing to one.
    pub split_fractions: (f64, f64, f64),
    pub standardize: bool,
    pub response_column: String,
    pub task_column: String,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            correlation_cutoff: 0.6,
            cv_folds: 10,
            split_fractions: (0.9, 0.05, 0.05),
            standardize: false,
            response_column: "response".into(),
            task_column: "task".into(),
        }
    }
}

impl IngestConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0 < self.correlation_cutoff && self.correlation_cutoff <= 1.0) {
            return Err(Error::InvalidParameter(
                "correlation_cutoff must lie in (0, 1]".into(),
            ));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidParameter("cv_folds must be >= 2".into()));
        }
        let (a, b, c) = self.split_fractions;
        if a < 0.0 || b < 0.0 || c < 0.0 || (a + b + c - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(
                "split fractions must be nonnegative and sum to 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub source: String,
    pub dummy_columns: Vec<String>,
    pub dropped_constant: Vec<String>,
    pub dropped_by_selection: Vec<String>,
    pub dropped_by_correlation: Vec<CorrelationDrop>,
    pub penalty_grid: Vec<f64>,
    pub cv_mse: Vec<f64>,
    pub selected_penalty: f64,
    pub scaling: Option<Scaling>,
    pub final_columns: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationDrop {
    pub column: String,
    pub correlated_with: String,
    pub correlation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scaling {
    pub feature_means: Vec<f64>,
    pub feature_sds: Vec<f64>,
    pub response_mean: f64,
    pub response_sd: f64,
}

#[derive(Debug, Clone)]
pub struct TaskTable {
    pub features: DMatrix<f64>,
    pub responses: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct MultiTaskTable {
    pub tasks: BTreeMap<String, TaskTable>,
    pub columns: Vec<String>,
    pub response: String,
    pub provenance: Provenance,
}

struct RawColumn {
    name: String,
    values: Vec<Option<f64>>,
}

struct DenseColumn {
    name: String,
    values: Vec<f64>,
}

pub fn ingest_csv(path: &Path, config: &IngestConfig) -> Result<MultiTaskTable> {
    config.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::MalformedCsv(e.to_string()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::MalformedCsv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let task_idx = headers
        .iter()
        .position(|h| h == &config.task_column)
        .ok_or_else(|| Error::MissingColumn(config.task_column.clone()))?;
    let response_idx = headers
        .iter()
        .position(|h| h == &config.response_column)
        .ok_or_else(|| Error::MissingColumn(config.response_column.clone()))?;

    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|&i| i != task_idx && i != response_idx)
        .collect();
    let mut raw: Vec<RawColumn> = feature_idx
        .iter()
        .map(|&i| RawColumn {
            name: headers[i].clone(),
            values: Vec::new(),
        })
        .collect();
    let mut labels: Vec<String> = Vec::new();
    let mut response: Vec<f64> = Vec::new();

    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedCsv(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(Error::MalformedCsv(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                record.len(),
                headers.len()
            )));
        }
        labels.push(record[task_idx].trim().to_string());
        let resp_cell = record[response_idx].trim();
        let resp: f64 = resp_cell.parse().map_err(|_| {
            Error::MalformedCsv(format!(
                "row {}: response {resp_cell:?} is not a number",
                line + 2
            ))
        })?;
        response.push(resp);
        for (col, &i) in raw.iter_mut().zip(&feature_idx) {
            let cell = record[i].trim();
            if cell.is_empty() {
                col.values.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::MalformedCsv(format!(
                        "row {}, column {:?}: {cell:?} is not a number",
                        line + 2,
                        col.name
                    ))
                })?;
                col.values.push(Some(v));
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::MalformedCsv("no data rows".into()));
    }

    let mut provenance = Provenance {
        source: path.display().to_string(),
        ..Provenance::default()
    };

    // missing-value dummies, then zero fill
    let mut dense: Vec<DenseColumn> = Vec::with_capacity(raw.len());
    let mut dummies: Vec<DenseColumn> = Vec::new();
    for col in &mut raw {
        if col.values.iter().any(Option::is_none) {
            let dummy_name = format!("{}_missing", col.name);
            dummies.push(DenseColumn {
                name: dummy_name.clone(),
                values: col
                    .values
                    .iter()
                    .map(|v| if v.is_none() { 1.0 } else { 0.0 })
                    .collect(),
            });
            provenance.dummy_columns.push(dummy_name);
        }
        dense.push(DenseColumn {
            name: col.name.clone(),
            values: col.values.iter().map(|v| v.unwrap_or(0.0)).collect(),
        });
    }
    dense.extend(dummies);

    // constant columns cannot be scaled or selected
    dense.retain(|col| {
        let constant = col.values.iter().all(|&v| v == col.values[0]);
        if constant {
            provenance.dropped_constant.push(col.name.clone());
        }
        !constant
    });

    // global cross-validated l1 feature selection
    if !dense.is_empty() {
        let keep = select_features(&dense, &response, config, &mut provenance)?;
        let mut idx = 0usize;
        dense.retain(|col| {
            let kept = keep[idx];
            if !kept {
                provenance.dropped_by_selection.push(col.name.clone());
            }
            idx += 1;
            kept
        });
    }

    // sequential correlation filter in column order
    let mut kept: Vec<DenseColumn> = Vec::with_capacity(dense.len());
    'cols: for col in dense {
        for earlier in &kept {
            let r = pearson(&col.values, &earlier.values);
            if r.abs() > config.correlation_cutoff {
                provenance.dropped_by_correlation.push(CorrelationDrop {
                    column: col.name.clone(),
                    correlated_with: earlier.name.clone(),
                    correlation: r,
                });
                continue 'cols;
            }
        }
        kept.push(col);
    }

    let mut response = response;
    if config.standardize {
        let mut means = Vec::with_capacity(kept.len());
        let mut sds = Vec::with_capacity(kept.len());
        for col in kept.iter_mut() {
            let (mu, sd) = mean_sd(&col.values);
            for v in col.values.iter_mut() {
                *v = (*v - mu) / sd;
            }
            means.push(mu);
            sds.push(sd);
        }
        let (rmu, rsd) = mean_sd(&response);
        for v in response.iter_mut() {
            *v = (*v - rmu) / rsd;
        }
        provenance.scaling = Some(Scaling {
            feature_means: means,
            feature_sds: sds,
            response_mean: rmu,
            response_sd: rsd,
        });
    }

    provenance.final_columns = kept.iter().map(|c| c.name.clone()).collect();

    // partition rows by task label, preserving file order within a task
    let columns: Vec<String> = provenance.final_columns.clone();
    let mut tasks: BTreeMap<String, TaskTable> = BTreeMap::new();
    let mut task_rows: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        task_rows.entry(label.clone()).or_default().push(i);
    }
    for (label, rows) in task_rows {
        let mut x = DMatrix::<f64>::zeros(rows.len(), kept.len());
        let mut y = DVector::<f64>::zeros(rows.len());
        for (r, &i) in rows.iter().enumerate() {
            for (c, col) in kept.iter().enumerate() {
                x[(r, c)] = col.values[i];
            }
            y[r] = response[i];
        }
        tasks.insert(
            label,
            TaskTable {
                features: x,
                responses: y,
            },
        );
    }

    Ok(MultiTaskTable {
        tasks,
        columns,
        response: config.response_column.clone(),
        provenance,
    })
}

/// Lasso feature selection on the pooled, internally standardized table:
/// 20 log-spaced penalties spanning `[1e-4, 1] * lambda_max`, scored by
/// round-robin cross-validation, with nonzero coefficients at the winning
/// penalty marking the keepers.
fn select_features(
    dense: &[DenseColumn],
    response: &[f64],
    config: &IngestConfig,
    provenance: &mut Provenance,
) -> Result<Vec<bool>> {
    let n = response.len();
    let d = dense.len();
    let folds = config.cv_folds.min(n).max(2);

    let mut x = DMatrix::<f64>::zeros(n, d);
    for (c, col) in dense.iter().enumerate() {
        let (mu, sd) = mean_sd(&col.values);
        for r in 0..n {
            x[(r, c)] = (col.values[r] - mu) / sd;
        }
    }
    let (rmu, rsd) = mean_sd(response);
    let rsd = if rsd > 0.0 { rsd } else { 1.0 };
    let y = DVector::<f64>::from_iterator(n, response.iter().map(|v| (v - rmu) / rsd));

    let lambda_max = (x.tr_mul(&y)).amax() / n as f64;
    if lambda_max <= 0.0 {
        return Ok(vec![true; d]);
    }
    let grid: Vec<f64> = (0..20)
        .map(|i| lambda_max * 1e-4f64.powf(i as f64 / 19.0))
        .collect();

    let mut cv_mse = vec![0.0f64; grid.len()];
    for fold in 0..folds {
        let train_rows: Vec<usize> = (0..n).filter(|r| r % folds != fold).collect();
        let test_rows: Vec<usize> = (0..n).filter(|r| r % folds == fold).collect();
        if train_rows.is_empty() || test_rows.is_empty() {
            continue;
        }
        let xt = x.select_rows(train_rows.iter());
        let yt = y.select_rows(train_rows.iter());
        let gram = xt.tr_mul(&xt);
        let xty = xt.tr_mul(&yt);
        let yty = yt.norm_squared();
        let mut warm = DVector::<f64>::zeros(d);
        for (g, &lambda) in grid.iter().enumerate() {
            let cfg = LassoConfig {
                penalty: lambda,
                tolerance: 1e-6,
                ..LassoConfig::default()
            };
            let fit =
                lasso_fit_from_stats(&gram, &xty, yty, train_rows.len(), &cfg, Some(&warm))?;
            warm = fit.coefficients.clone();
            for &r in &test_rows {
                let pred = x.row(r).transpose().dot(&fit.coefficients);
                cv_mse[g] += (y[r] - pred) * (y[r] - pred);
            }
        }
    }
    for v in cv_mse.iter_mut() {
        *v /= n as f64;
    }

    // argmin; ties go to the larger penalty (earlier in the grid)
    let mut best = 0usize;
    for g in 1..grid.len() {
        if cv_mse[g] < cv_mse[best] {
            best = g;
        }
    }
    provenance.penalty_grid = grid.clone();
    provenance.cv_mse = cv_mse;
    provenance.selected_penalty = grid[best];

    let gram = x.tr_mul(&x);
    let xty = x.tr_mul(&y);
    let cfg = LassoConfig {
        penalty: grid[best],
        tolerance: 1e-8,
        ..LassoConfig::default()
    };
    let fit = lasso_fit_from_stats(&gram, &xty, y.norm_squared(), n, &cfg, None)?;
    Ok(fit.coefficients.iter().map(|&v| v != 0.0).collect())
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
    (mu, var.sqrt())
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, sa) = mean_sd(a);
    let (mb, sb) = mean_sd(b);
    if sa == 0.0 || sb == 0.0 {
        return 0.0;
    }
    let cov = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / n;
    cov / (sa * sb)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Splits every task's rows into disjoint train/validation/test subsets
/// matching the fractions up to largest-remainder rounding.
pub fn split_tasks(
    table: &MultiTaskTable,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(MultiTaskTable, MultiTaskTable, MultiTaskTable)> {
    let (ft, fv, fs) = fractions;
    if ft < 0.0 || fv < 0.0 || fs < 0.0 || (ft + fv + fs - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "split fractions must be nonnegative and sum to 1".into(),
        ));
    }
    let names: [&'static str; 3] = ["train", "validation", "test"];
    let mut parts: [BTreeMap<String, TaskTable>; 3] = Default::default();

    for (label, task) in &table.tasks {
        let n = task.responses.len();
        let counts = largest_remainder(&[ft, fv, fs], n);
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 && [ft, fv, fs][i] > 0.0 {
                return Err(Error::TooFewRows {
                    task: label.clone(),
                    split: names[i],
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(label.as_bytes()));
        let mut order: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rand::Rng::random_range(&mut rng, 0..=i);
            order.swap(i, j);
        }
        let mut start = 0usize;
        for (i, &c) in counts.iter().enumerate() {
            let rows = &order[start..start + c];
            start += c;
            if c == 0 {
                continue;
            }
            let mut x = DMatrix::<f64>::zeros(c, task.features.ncols());
            let mut y = DVector::<f64>::zeros(c);
            for (r, &src) in rows.iter().enumerate() {
                x.set_row(r, &task.features.row(src));
                y[r] = task.responses[src];
            }
            parts[i].insert(
                label.clone(),
                TaskTable {
                    features: x,
                    responses: y,
                },
            );
        }
    }

    let wrap = |tasks: BTreeMap<String, TaskTable>| MultiTaskTable {
        tasks,
        columns: table.columns.clone(),
        response: table.response.clone(),
        provenance: table.provenance.clone(),
    };
    let [a, b, c] = parts;
    Ok((wrap(a), wrap(b), wrap(c)))
}

fn largest_remainder(fractions: &[f64], n: usize) -> Vec<usize> {
    let raw: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|&v| v.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in 0..n - assigned {
        counts[order[i % fractions.len()]] += 1;
    }
    counts
}

/// Writes one processed CSV per task plus a `provenance.json` sidecar.
pub fn write_outputs(table: &MultiTaskTable, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (label, task) in &table.tasks {
        let mut writer = csv::Writer::from_path(dir.join(format!("task_{label}.csv")))
            .map_err(|e| Error::MalformedCsv(e.to_string()))?;
        let mut header: Vec<String> = vec!["task".into()];
        header.extend(table.columns.iter().cloned());
        header.push(table.response.clone());
        writer
            .write_record(&header)
            .map_err(|e| Error::MalformedCsv(e.to_string()))?;
        for r in 0..task.responses.len() {
            let mut record: Vec<String> = vec![label.clone()];
            for c in 0..table.columns.len() {
                record.push(format!("{}", task.features[(r, c)]));
            }
            record.push(format!("{}", task.responses[r]));
            writer
                .write_record(&record)
                .map_err(|e| Error::MalformedCsv(e.to_string()))?;
        }
        writer.flush()?;
    }
    let json = serde_json::to_string_pretty(&table.provenance)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    std::fs::write(dir.join("provenance.json"), json)?;
    Ok(())
}
