//! Median-based two-stage multitask estimator and its baselines.
//!
//! Stage one pools the per-task least squares estimates of the largest tau
//! tasks into a coordinate-wise median; stage two shrinks each task's own
//! estimate towards that median, either by hard thresholding or by soft
//! shrinkage, with per-coordinate thresholds `gamma^m * sqrt(v^m_k)` scaled
//! by the leverage diagonal. Tau balances two goals: the pooled tasks should
//! carry most of the total sample, and they should be roughly balanced, so
//! tau minimizes `max(n_(1), total/m) / n_(m)` over the descending order
//! statistics of the sample sizes.

use nalgebra::DVector;

use crate::aggregate::{coordinatewise_median, trimmed_mean};
use crate::error::{Error, Result};
use crate::lasso::{lasso_fit_from_stats, rate_penalty, LassoConfig};
use crate::ols::{ols_fit, summarize_task, OlsFit, TaskSummary, DEFAULT_RANK_TOL};
use crate::task::TaskDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MolarOption {
    HardThreshold,
    SoftShrinkage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdSchedule {
    /// `gamma^m = c_gamma * sigma * sqrt(max(ln(tau * max(n_tau, n_m) / n_m), 1))`
    SqrtLog,
    /// `gamma^m = c_gamma * ln(tau * max(n_tau, n_m) / n_m)`, with `c_gamma`
    /// carrying the noise-scale units.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseScale {
    Known(f64),
    /// Pooled degrees-of-freedom-adjusted residual variance across tasks.
    Estimate,
}

#[derive(Debug, Clone)]
pub struct MolarConfig {
    pub option: MolarOption,
    pub c_gamma: f64,
    pub noise_scale: NoiseScale,
    pub tau_override: Option<usize>,
    pub schedule: ThresholdSchedule,
}

impl Default for MolarConfig {
    fn default() -> Self {
        Self {
            option: MolarOption::HardThreshold,
            c_gamma: 1.4,
            noise_scale: NoiseScale::Estimate,
            tau_override: None,
            schedule: ThresholdSchedule::SqrtLog,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MolarResult {
    /// Coordinate-wise median of the pooled tasks' estimates.
    pub global_estimate: DVector<f64>,
    /// Final per-task estimates, in input task order.
    pub task_estimates: Vec<DVector<f64>>,
    /// Number of largest tasks pooled into the median.
    pub tau: usize,
    /// Per-task thresholds gamma^m, in input task order.
    pub thresholds: Vec<f64>,
    /// Per-task leverage diagonals v^m, in input task order.
    pub per_task_leverage: Vec<DVector<f64>>,
    /// Noise scale actually used (supplied or estimated).
    pub sigma: f64,
}

/// Outcome of the tau-selection rule.
#[derive(Debug, Clone)]
pub struct TauSelection {
    /// Largest index minimizing the criterion over the sorted sizes.
    pub tau: usize,
    /// Task indices sorted by sample size, descending (stable on ties).
    pub order: Vec<usize>,
    /// Criterion value at each m = 1..=M against the sorted order.
    pub criterion: Vec<f64>,
}

/// Picks how many of the largest tasks to pool. Ties in the criterion go to
/// the largest index, and equal values are detected with a small relative
/// tolerance so that rescaled inputs select identically.
pub fn select_tau(sample_sizes: &[usize]) -> Result<TauSelection> {
    if sample_sizes.is_empty() {
        return Err(Error::EmptyInput("select_tau needs at least one size"));
    }
    if sample_sizes.iter().any(|&n| n == 0) {
        return Err(Error::NonPositiveSize);
    }
    let m = sample_sizes.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        sample_sizes[b]
            .cmp(&sample_sizes[a])
            .then_with(|| a.cmp(&b))
    });
    let total: f64 = sample_sizes.iter().map(|&n| n as f64).sum();
    let largest = sample_sizes[order[0]] as f64;
    let criterion: Vec<f64> = (1..=m)
        .map(|i| largest.max(total / i as f64) / sample_sizes[order[i - 1]] as f64)
        .collect();
    let best = criterion.iter().cloned().fold(f64::INFINITY, f64::min);
    let tau = criterion
        .iter()
        .rposition(|&c| c <= best * (1.0 + 1e-12))
        .unwrap()
        + 1;
    Ok(TauSelection {
        tau,
        order,
        criterion,
    })
}

/// Per-task threshold gamma^m for pooled size `n_tau` and task size `n_m`.
pub fn threshold_schedule(
    config: &MolarConfig,
    sigma: f64,
    tau: usize,
    n_tau: usize,
    n_m: usize,
) -> f64 {
    let arg = tau as f64 * (n_tau.max(n_m) as f64) / n_m as f64;
    match config.schedule {
        ThresholdSchedule::SqrtLog => config.c_gamma * sigma * arg.ln().max(1.0).sqrt(),
        ThresholdSchedule::Log => config.c_gamma * arg.ln(),
    }
}

/// Two-stage estimator over raw datasets. Any task failing its least squares
/// fit aborts the whole call; callers that want to drop such tasks must
/// filter beforehand, because exclusion changes the tau selection.
pub fn molar_fit(tasks: &[TaskDataset], config: &MolarConfig) -> Result<MolarResult> {
    let fits = tasks.iter().map(ols_fit).collect::<Result<Vec<_>>>()?;
    molar_fit_from_fits(&fits, config)
}

/// Two-stage estimator over precomputed per-task least squares fits.
pub fn molar_fit_from_fits(fits: &[OlsFit], config: &MolarConfig) -> Result<MolarResult> {
    if fits.is_empty() {
        return Err(Error::EmptyInput("molar_fit needs at least one task"));
    }
    let m = fits.len();
    let d = fits[0].coefficients.len();
    if fits.iter().any(|f| f.coefficients.len() != d) {
        return Err(Error::ShapeMismatch(
            "tasks disagree on the coefficient dimension".into(),
        ));
    }
    let sizes: Vec<usize> = fits.iter().map(|f| f.sample_size).collect();
    let selection = select_tau(&sizes)?;
    let tau = match config.tau_override {
        Some(t) => {
            if t < 1 || t > m {
                return Err(Error::InvalidParameter(format!(
                    "tau_override {t} outside [1, {m}]"
                )));
            }
            t
        }
        None => selection.tau,
    };
    let n_tau = sizes[selection.order[tau - 1]];

    let pooled: Vec<DVector<f64>> = selection.order[..tau]
        .iter()
        .map(|&i| fits[i].coefficients.clone())
        .collect();
    let global = coordinatewise_median(&pooled)?;

    let sigma = match config.noise_scale {
        NoiseScale::Known(s) => {
            if !(s >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "noise scale must be >= 0, got {s}"
                )));
            }
            s
        }
        NoiseScale::Estimate => {
            let dof: usize = sizes.iter().map(|&n| n.saturating_sub(d)).sum();
            if dof == 0 {
                return Err(Error::InsufficientDegreesOfFreedom);
            }
            let rss: f64 = fits.iter().map(|f| f.residual_ss).sum();
            (rss / dof as f64).sqrt()
        }
    };

    let mut thresholds = Vec::with_capacity(m);
    let mut task_estimates = Vec::with_capacity(m);
    for fit in fits {
        let gamma = threshold_schedule(config, sigma, tau, n_tau, fit.sample_size);
        thresholds.push(gamma);
        let mut est = DVector::zeros(d);
        for k in 0..d {
            let t = gamma * fit.leverage_diag[k].sqrt();
            let ind = fit.coefficients[k];
            let glob = global[k];
            // Soft shrinkage `glob + SoftShrink(ind - glob, t)` is written as
            // `ind - sign(ind - glob) * t` outside the dead zone so that a
            // zero threshold reproduces the individual estimate bit-for-bit.
            let diff = ind - glob;
            est[k] = match config.option {
                MolarOption::HardThreshold => {
                    if diff.abs() <= t {
                        glob
                    } else {
                        ind
                    }
                }
                MolarOption::SoftShrinkage => {
                    if diff.abs() <= t {
                        glob
                    } else {
                        ind - diff.signum() * t
                    }
                }
            };
        }
        task_estimates.push(est);
    }

    Ok(MolarResult {
        global_estimate: global,
        task_estimates,
        tau,
        thresholds,
        per_task_leverage: fits.iter().map(|f| f.leverage_diag.clone()).collect(),
        sigma,
    })
}

/// Least squares on the row-concatenation of all tasks, computed from
/// accumulated Gram matrices so the stacked design is never materialized.
pub fn pooled_ols_fit(tasks: &[TaskDataset]) -> Result<DVector<f64>> {
    if tasks.is_empty() {
        return Err(Error::EmptyInput("pooled fit needs at least one task"));
    }
    let d = tasks[0].dim();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(d, d);
    let mut xty = DVector::<f64>::zeros(d);
    let mut n_total = 0usize;
    for t in tasks {
        if t.dim() != d {
            return Err(Error::ShapeMismatch(
                "tasks disagree on the feature dimension".into(),
            ));
        }
        gram += t.features.tr_mul(&t.features);
        xty += t.features.tr_mul(&t.responses);
        n_total += t.len();
    }
    pooled_ols_from_stats(&gram, &xty, n_total)
}

/// Pooled solve from accumulated `sum X^T X` and `sum X^T Y`.
pub fn pooled_ols_from_stats(
    gram: &nalgebra::DMatrix<f64>,
    xty: &DVector<f64>,
    n_total: usize,
) -> Result<DVector<f64>> {
    let d = xty.len();
    if n_total < d {
        return Err(Error::SingularDesign {
            task: None,
            detail: format!("pooled rows {n_total} < d = {d}"),
        });
    }
    let eig = nalgebra::SymmetricEigen::new(gram.clone());
    let lmax = eig.eigenvalues.amax();
    let lmin = eig.eigenvalues.min();
    if lmax <= 0.0 || lmin / lmax < DEFAULT_RANK_TOL {
        return Err(Error::SingularDesign {
            task: None,
            detail: format!(
                "pooled eigenvalue ratio {:.3e} below tolerance",
                lmin / lmax
            ),
        });
    }
    let mut w = eig.eigenvectors.tr_mul(xty);
    for i in 0..d {
        w[i] /= eig.eigenvalues[i];
    }
    Ok(&eig.eigenvectors * w)
}

#[derive(Debug, Clone)]
pub struct RobustMultitaskConfig {
    /// Trimming proportion omega in [0, 0.5).
    pub trim_fraction: f64,
    /// Numerical coefficient c_lambda of the per-task penalty.
    pub penalty_coefficient: f64,
    /// When set, omega is derived as `min(0.45, sqrt(s/d))`.
    pub sparsity_hint: Option<usize>,
}

impl Default for RobustMultitaskConfig {
    fn default() -> Self {
        Self {
            trim_fraction: 0.1,
            penalty_coefficient: 0.035,
            sparsity_hint: None,
        }
    }
}

/// Trimmed-mean center followed by an l1 shrinkage of every task towards it:
/// each task solves a lasso with `center_offset` at the trimmed mean and
/// `lambda^m = c_lambda * sqrt(ln(n^m d)/n^m)`.
pub fn robust_multitask_fit(
    tasks: &[TaskDataset],
    config: &RobustMultitaskConfig,
) -> Result<Vec<DVector<f64>>> {
    let summaries = tasks
        .iter()
        .map(|t| summarize_task(t, DEFAULT_RANK_TOL))
        .collect::<Result<Vec<_>>>()?;
    robust_multitask_from_summaries(&summaries, config)
}

pub fn robust_multitask_from_summaries(
    summaries: &[TaskSummary],
    config: &RobustMultitaskConfig,
) -> Result<Vec<DVector<f64>>> {
    if summaries.is_empty() {
        return Err(Error::EmptyInput("robust multitask needs tasks"));
    }
    let d = summaries[0].dim();
    let omega = match config.sparsity_hint {
        Some(s) => (s as f64 / d as f64).sqrt().min(0.45),
        None => config.trim_fraction,
    };
    let estimates: Vec<DVector<f64>> = summaries
        .iter()
        .map(|s| s.fit.coefficients.clone())
        .collect();
    let center = trimmed_mean(&estimates, omega)?;

    let mut out = Vec::with_capacity(summaries.len());
    for s in summaries {
        let cfg = LassoConfig {
            penalty: rate_penalty(config.penalty_coefficient, s.sample_size(), d),
            center_offset: Some(center.clone()),
            ..LassoConfig::default()
        };
        let fit = lasso_fit_from_stats(
            &s.gram,
            &s.xty,
            s.yty,
            s.sample_size(),
            &cfg,
            Some(&s.fit.coefficients),
        )?;
        out.push(fit.coefficients);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn tau_balanced_case() {
        let sel = select_tau(&[100, 100, 100]).unwrap();
        assert_eq!(sel.tau, 3);
        assert_abs_diff_eq!(sel.criterion[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sel.criterion[1], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sel.criterion[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tau_singly_dominant() {
        let sel = select_tau(&[1000, 10, 10]).unwrap();
        assert_eq!(sel.tau, 1);
        assert_abs_diff_eq!(sel.criterion[0], 1.02, epsilon = 1e-12);
        assert_abs_diff_eq!(sel.criterion[1], 100.0, epsilon = 1e-12);
    }

    #[test]
    fn tau_geometric_sizes() {
        let sel = select_tau(&[8, 4, 2, 1]).unwrap();
        assert_eq!(sel.tau, 1);
        let expected = [1.875, 2.0, 4.0, 8.0];
        for (c, e) in sel.criterion.iter().zip(expected) {
            assert_abs_diff_eq!(*c, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn tau_input_order_does_not_matter() {
        let sel = select_tau(&[10, 1000, 10]).unwrap();
        assert_eq!(sel.tau, 1);
        assert_eq!(sel.order[0], 1);
    }

    #[test]
    fn tau_errors() {
        assert!(matches!(select_tau(&[]), Err(Error::EmptyInput(_))));
        assert!(matches!(
            select_tau(&[5, 0]),
            Err(Error::NonPositiveSize)
        ));
    }

    fn config(option: MolarOption, c_gamma: f64, sigma: f64) -> MolarConfig {
        MolarConfig {
            option,
            c_gamma,
            noise_scale: NoiseScale::Known(sigma),
            tau_override: None,
            schedule: ThresholdSchedule::SqrtLog,
        }
    }

    #[test]
    fn schedule_values() {
        let cfg = config(MolarOption::HardThreshold, 0.7, 1.0);
        // log argument of 1 clamps to 1
        assert_abs_diff_eq!(threshold_schedule(&cfg, 2.0, 1, 50, 50), 1.4, epsilon = 1e-12);
        // zero coefficient kills the threshold
        let zero = config(MolarOption::HardThreshold, 0.0, 1.0);
        assert_eq!(threshold_schedule(&zero, 2.0, 7, 100, 10), 0.0);
        // appendix form: tau = e^2, equal sizes
        let app = MolarConfig {
            schedule: ThresholdSchedule::Log,
            c_gamma: 1.0,
            ..config(MolarOption::HardThreshold, 1.0, 1.0)
        };
        let tau_e2 = (std::f64::consts::E * std::f64::consts::E).round() as usize;
        let got = threshold_schedule(&app, 5.0, tau_e2, 30, 30);
        assert_abs_diff_eq!(got, (tau_e2 as f64).ln(), epsilon = 1e-12);
    }

    /// d = 1 tasks with X = [[1],[1]] and constant responses, so the
    /// individual estimate equals the constant and v = 1/2.
    fn unit_tasks(values: &[f64]) -> Vec<TaskDataset> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                TaskDataset::new(
                    i,
                    DMatrix::from_column_slice(2, 1, &[1.0, 1.0]),
                    DVector::from_column_slice(&[v, v]),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn hand_traced_example() {
        // Estimates (1, 1, 5), gamma = 1, threshold t = sqrt(1/2).
        let tasks = unit_tasks(&[1.0, 1.0, 5.0]);
        // SqrtLog with tau = 3 and equal sizes gives
        // gamma = c * sigma * sqrt(ln 3); pick c so gamma = 1.
        let c = 1.0 / (3.0f64).ln().sqrt();
        let hard = molar_fit(&tasks, &config(MolarOption::HardThreshold, c, 1.0)).unwrap();
        assert_eq!(hard.tau, 3);
        assert_abs_diff_eq!(hard.thresholds[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hard.global_estimate[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hard.task_estimates[0][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hard.task_estimates[1][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hard.task_estimates[2][0], 5.0, epsilon = 1e-12);

        let soft = molar_fit(&tasks, &config(MolarOption::SoftShrinkage, c, 1.0)).unwrap();
        let t = 0.5f64.sqrt();
        assert_abs_diff_eq!(soft.task_estimates[2][0], 1.0 + (4.0 - t), epsilon = 1e-9);
        assert_abs_diff_eq!(soft.task_estimates[0][0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_task_collapses_to_ols() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = DMatrix::<f64>::from_fn(20, 3, |_, _| StandardNormal.sample(&mut rng));
        let y = DVector::<f64>::from_fn(20, |_, _| StandardNormal.sample(&mut rng));
        let task = TaskDataset::new(0, x, y).unwrap();
        let ols = ols_fit(&task).unwrap();
        for option in [MolarOption::HardThreshold, MolarOption::SoftShrinkage] {
            let res = molar_fit(std::slice::from_ref(&task), &config(option, 2.0, 1.0)).unwrap();
            assert_eq!(res.tau, 1);
            assert_eq!(res.task_estimates[0], ols.coefficients);
        }
    }

    #[test]
    fn zero_threshold_collapses_to_ols() {
        let tasks = unit_tasks(&[1.0, -2.0, 5.0, 0.5]);
        let fits: Vec<_> = tasks.iter().map(|t| ols_fit(t).unwrap()).collect();
        for option in [MolarOption::HardThreshold, MolarOption::SoftShrinkage] {
            let res = molar_fit(&tasks, &config(option, 0.0, 1.0)).unwrap();
            for (est, fit) in res.task_estimates.iter().zip(&fits) {
                assert_eq!(est, &fit.coefficients);
            }
        }
    }

    #[test]
    fn saturated_threshold_returns_global_everywhere() {
        let tasks = unit_tasks(&[1.0, 2.0, 50.0]);
        let res = molar_fit(&tasks, &config(MolarOption::HardThreshold, 1e6, 1.0)).unwrap();
        for est in &res.task_estimates {
            assert_eq!(est, &res.global_estimate);
        }
    }

    #[test]
    fn estimated_sigma_matches_pooled_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let tasks: Vec<TaskDataset> = (0..3)
            .map(|i| {
                let x = DMatrix::<f64>::from_fn(30, 2, |_, _| StandardNormal.sample(&mut rng));
                let y = DVector::<f64>::from_fn(30, |_, _| StandardNormal.sample(&mut rng));
                TaskDataset::new(i, x, y).unwrap()
            })
            .collect();
        let cfg = MolarConfig {
            noise_scale: NoiseScale::Estimate,
            ..config(MolarOption::HardThreshold, 1.0, 0.0)
        };
        let res = molar_fit(&tasks, &cfg).unwrap();
        let rss: f64 = tasks
            .iter()
            .map(|t| ols_fit(t).unwrap().residual_ss)
            .sum();
        assert_abs_diff_eq!(res.sigma, (rss / (3.0 * 28.0)).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn estimate_with_zero_dof_is_an_error() {
        // n = d = 2 on every task leaves no residual degrees of freedom
        let tasks: Vec<TaskDataset> = (0..2)
            .map(|i| {
                TaskDataset::new(
                    i,
                    DMatrix::identity(2, 2),
                    DVector::from_column_slice(&[1.0, 2.0]),
                )
                .unwrap()
            })
            .collect();
        let cfg = MolarConfig {
            noise_scale: NoiseScale::Estimate,
            ..MolarConfig::default()
        };
        assert!(matches!(
            molar_fit(&tasks, &cfg),
            Err(Error::InsufficientDegreesOfFreedom)
        ));
    }

    #[test]
    fn singular_task_aborts_with_its_id() {
        let good = unit_tasks(&[1.0]).pop().unwrap();
        let bad = TaskDataset::new(7, DMatrix::zeros(1, 2), DVector::zeros(1)).unwrap();
        match molar_fit(&[good, bad], &MolarConfig::default()) {
            Err(Error::SingularDesign { task: Some(7), .. }) => {}
            other => panic!("expected singular design for task 7, got {other:?}"),
        }
    }

    #[test]
    fn pooled_examples() {
        // duplication invariance
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let x = DMatrix::<f64>::from_fn(15, 3, |_, _| StandardNormal.sample(&mut rng));
        let y = DVector::<f64>::from_fn(15, |_, _| StandardNormal.sample(&mut rng));
        let t = TaskDataset::new(0, x, y).unwrap();
        let single = pooled_ols_fit(std::slice::from_ref(&t)).unwrap();
        let copies = vec![t.clone(), t.clone(), t];
        let pooled = pooled_ols_fit(&copies).unwrap();
        assert!((&single - &pooled).amax() < 1e-10);

        // two single-row tasks, d = 1: pooled beta is the mean response
        let a = TaskDataset::new(
            0,
            DMatrix::from_column_slice(1, 1, &[1.0]),
            DVector::from_column_slice(&[0.0]),
        )
        .unwrap();
        let b = TaskDataset::new(
            1,
            DMatrix::from_column_slice(1, 1, &[1.0]),
            DVector::from_column_slice(&[2.0]),
        )
        .unwrap();
        let fit = pooled_ols_fit(&[a, b]).unwrap();
        assert_abs_diff_eq!(fit[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pooled_noiseless_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let beta = DVector::from_column_slice(&[0.3, -1.2, 0.8]);
        let tasks: Vec<TaskDataset> = (0..4)
            .map(|i| {
                let x = DMatrix::<f64>::from_fn(10, 3, |_, _| StandardNormal.sample(&mut rng));
                let y = &x * &beta;
                TaskDataset::new(i, x, y).unwrap()
            })
            .collect();
        let fit = pooled_ols_fit(&tasks).unwrap();
        assert!((&fit - &beta).amax() < 1e-10);
    }

    #[test]
    fn robust_multitask_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let beta = DVector::from_column_slice(&[1.0, -0.5]);
        let tasks: Vec<TaskDataset> = (0..3)
            .map(|i| {
                let x = DMatrix::<f64>::from_fn(12, 2, |_, _| StandardNormal.sample(&mut rng));
                let y = &x * &beta;
                TaskDataset::new(i, x, y).unwrap()
            })
            .collect();

        // omega = 0, c_lambda = 0: per-task least squares
        let cfg = RobustMultitaskConfig {
            trim_fraction: 0.0,
            penalty_coefficient: 0.0,
            sparsity_hint: None,
        };
        let out = robust_multitask_fit(&tasks, &cfg).unwrap();
        for (est, t) in out.iter().zip(&tasks) {
            let ols = ols_fit(t).unwrap();
            assert!((est - &ols.coefficients).amax() < 1e-6);
        }

        // enormous penalty: every estimate equals the trimmed-mean center
        let cfg = RobustMultitaskConfig {
            trim_fraction: 0.2,
            penalty_coefficient: 1e9,
            sparsity_hint: None,
        };
        let out = robust_multitask_fit(&tasks, &cfg).unwrap();
        let fits: Vec<DVector<f64>> = tasks
            .iter()
            .map(|t| ols_fit(t).unwrap().coefficients)
            .collect();
        let center = trimmed_mean(&fits, 0.2).unwrap();
        for est in &out {
            assert!((est - &center).amax() < 1e-9);
        }

        // homogeneous noiseless tasks recover beta under defaults
        let out = robust_multitask_fit(&tasks, &RobustMultitaskConfig::default()).unwrap();
        for est in &out {
            assert!((est - &beta).amax() < 1e-4);
        }
    }
}
