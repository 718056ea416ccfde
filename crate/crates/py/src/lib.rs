//! Python bindings for the multitask estimation and bandit toolkit.
//!
//! Matrices cross the boundary as lists of rows; estimators return plain
//! lists so the module has no numpy requirement.

use molar::bandit::{
    build_schedule, run_episode, BanditModel, ContextSpec, EligibilityRule, PolicySpec,
};
use molar::data::{
    gen_bandit_world, gen_regression_tasks, perturb_sparse, sample_sphere, ActivationSpec,
    BanditWorldSpec, NoiseFamily, SynthRegressionSpec, TaskSizes,
};
use molar::lasso::{lasso_fit as lasso_fit_rs, LassoConfig};
use molar::molar::{
    molar_fit_from_fits, pooled_ols_fit as pooled_rs, robust_multitask_fit as rm_rs, select_tau,
    MolarConfig, MolarOption, NoiseScale, RobustMultitaskConfig, ThresholdSchedule,
};
use molar::ols::{ols_fit as ols_fit_rs, OlsFit};
use molar::recovery::{multitask_dantzig, project_unit_ball as project_rs, RecoveryProblem};
use molar::TaskDataset as TaskDatasetRs;
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn to_py_err(e: molar::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(PyValueError::new_err("need at least one row"));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("rows have unequal lengths"));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), d, &flat))
}

fn vectors_from_lists(lists: &[Vec<f64>]) -> PyResult<Vec<DVector<f64>>> {
    if lists.is_empty() {
        return Err(PyValueError::new_err("need at least one vector"));
    }
    Ok(lists
        .iter()
        .map(|v| DVector::from_column_slice(v))
        .collect())
}

fn parse_option(option: &str) -> PyResult<MolarOption> {
    match option {
        "hard" => Ok(MolarOption::HardThreshold),
        "soft" => Ok(MolarOption::SoftShrinkage),
        other => Err(PyValueError::new_err(format!(
            "option must be 'hard' or 'soft', got {other:?}"
        ))),
    }
}

fn parse_schedule(schedule: &str) -> PyResult<ThresholdSchedule> {
    match schedule {
        "sqrt_log" => Ok(ThresholdSchedule::SqrtLog),
        "log" => Ok(ThresholdSchedule::Log),
        other => Err(PyValueError::new_err(format!(
            "schedule must be 'sqrt_log' or 'log', got {other:?}"
        ))),
    }
}

/// One task's design matrix and responses.
#[pyclass(name = "TaskDataset", from_py_object)]
#[derive(Clone)]
struct PyTaskDataset {
    inner: TaskDatasetRs,
}

#[pymethods]
impl PyTaskDataset {
    #[new]
    fn new(task_id: usize, features: Vec<Vec<f64>>, responses: Vec<f64>) -> PyResult<Self> {
        let x = matrix_from_rows(&features)?;
        let y = DVector::from_column_slice(&responses);
        Ok(Self {
            inner: TaskDatasetRs::new(task_id, x, y).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn task_id(&self) -> usize {
        self.inner.task_id
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!(
            "TaskDataset(task_id={}, n={}, d={})",
            self.inner.task_id,
            self.inner.len(),
            self.inner.dim()
        )
    }
}

/// Least squares fit with the leverage diagonal of (X^T X)^{-1}.
#[pyclass(name = "OlsFit", from_py_object)]
#[derive(Clone)]
struct PyOlsFit {
    inner: OlsFit,
}

#[pymethods]
impl PyOlsFit {
    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients.as_slice().to_vec()
    }

    #[getter]
    fn leverage_diag(&self) -> Vec<f64> {
        self.inner.leverage_diag.as_slice().to_vec()
    }

    #[getter]
    fn sample_size(&self) -> usize {
        self.inner.sample_size
    }

    #[getter]
    fn residual_ss(&self) -> f64 {
        self.inner.residual_ss
    }
}

/// Output of the two-stage median-shrinkage estimator.
#[pyclass(name = "MolarResult")]
struct PyMolarResult {
    #[pyo3(get)]
    global_estimate: Vec<f64>,
    #[pyo3(get)]
    task_estimates: Vec<Vec<f64>>,
    #[pyo3(get)]
    tau: usize,
    #[pyo3(get)]
    thresholds: Vec<f64>,
    #[pyo3(get)]
    sigma: f64,
}

#[pyfunction]
fn soft_shrink(x: f64, lambda: f64) -> f64 {
    molar::soft_shrink(x, lambda)
}

#[pyfunction]
fn coordinatewise_median(estimates: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let vs = vectors_from_lists(&estimates)?;
    Ok(molar::coordinatewise_median(&vs)
        .map_err(to_py_err)?
        .as_slice()
        .to_vec())
}

#[pyfunction]
fn trimmed_mean(values: Vec<Vec<f64>>, trim_fraction: f64) -> PyResult<Vec<f64>> {
    let vs = vectors_from_lists(&values)?;
    Ok(molar::trimmed_mean(&vs, trim_fraction)
        .map_err(to_py_err)?
        .as_slice()
        .to_vec())
}

#[pyfunction]
fn ols_fit(task: &PyTaskDataset) -> PyResult<PyOlsFit> {
    Ok(PyOlsFit {
        inner: ols_fit_rs(&task.inner).map_err(to_py_err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (task, penalty, center_offset=None, tolerance=1e-7, max_iterations=10_000))]
fn lasso_fit(
    task: &PyTaskDataset,
    penalty: f64,
    center_offset: Option<Vec<f64>>,
    tolerance: f64,
    max_iterations: usize,
) -> PyResult<(Vec<f64>, bool)> {
    let config = LassoConfig {
        penalty,
        tolerance,
        max_iterations,
        center_offset: center_offset.map(|c| DVector::from_column_slice(&c)),
    };
    let fit = lasso_fit_rs(&task.inner, &config).map_err(to_py_err)?;
    Ok((fit.coefficients.as_slice().to_vec(), fit.converged))
}

/// Returns `(tau, order)` where `order` lists task indices by size,
/// descending.
#[pyfunction(name = "select_tau")]
fn select_tau_py(sample_sizes: Vec<usize>) -> PyResult<(usize, Vec<usize>)> {
    let sel = select_tau(&sample_sizes).map_err(to_py_err)?;
    Ok((sel.tau, sel.order))
}

#[pyfunction]
#[pyo3(signature = (tasks, c_gamma=1.4, option="hard", schedule="sqrt_log", sigma=None, tau_override=None))]
fn molar_fit(
    tasks: Vec<PyTaskDataset>,
    c_gamma: f64,
    option: &str,
    schedule: &str,
    sigma: Option<f64>,
    tau_override: Option<usize>,
) -> PyResult<PyMolarResult> {
    let fits: Vec<OlsFit> = tasks
        .iter()
        .map(|t| ols_fit_rs(&t.inner))
        .collect::<molar::Result<_>>()
        .map_err(to_py_err)?;
    let config = MolarConfig {
        option: parse_option(option)?,
        c_gamma,
        noise_scale: match sigma {
            Some(s) => NoiseScale::Known(s),
            None => NoiseScale::Estimate,
        },
        tau_override,
        schedule: parse_schedule(schedule)?,
    };
    let res = molar_fit_from_fits(&fits, &config).map_err(to_py_err)?;
    Ok(PyMolarResult {
        global_estimate: res.global_estimate.as_slice().to_vec(),
        task_estimates: res
            .task_estimates
            .iter()
            .map(|v| v.as_slice().to_vec())
            .collect(),
        tau: res.tau,
        thresholds: res.thresholds,
        sigma: res.sigma,
    })
}

#[pyfunction]
fn pooled_ols_fit(tasks: Vec<PyTaskDataset>) -> PyResult<Vec<f64>> {
    let inner: Vec<TaskDatasetRs> = tasks.into_iter().map(|t| t.inner).collect();
    Ok(pooled_rs(&inner).map_err(to_py_err)?.as_slice().to_vec())
}

#[pyfunction]
#[pyo3(signature = (tasks, c_lambda, trim_fraction=0.1, sparsity_hint=None))]
fn robust_multitask_fit(
    tasks: Vec<PyTaskDataset>,
    c_lambda: f64,
    trim_fraction: f64,
    sparsity_hint: Option<usize>,
) -> PyResult<Vec<Vec<f64>>> {
    let inner: Vec<TaskDatasetRs> = tasks.into_iter().map(|t| t.inner).collect();
    let config = RobustMultitaskConfig {
        trim_fraction,
        penalty_coefficient: c_lambda,
        sparsity_hint,
    };
    Ok(rm_rs(&inner, &config)
        .map_err(to_py_err)?
        .iter()
        .map(|v| v.as_slice().to_vec())
        .collect())
}

#[pyfunction]
#[pyo3(signature = (tasks, tolerance=1e-8, max_iterations=50_000))]
fn recover(
    py: Python<'_>,
    tasks: Vec<PyTaskDataset>,
    tolerance: f64,
    max_iterations: usize,
) -> PyResult<Py<PyAny>> {
    let mut problem =
        RecoveryProblem::new(tasks.into_iter().map(|t| t.inner).collect::<Vec<_>>());
    problem.solver_tolerance = tolerance;
    problem.max_iterations = max_iterations;
    let res = multitask_dantzig(&problem).map_err(to_py_err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("global", res.global.as_slice().to_vec())?;
    dict.set_item(
        "deltas",
        res.deltas
            .iter()
            .map(|v| v.as_slice().to_vec())
            .collect::<Vec<_>>(),
    )?;
    dict.set_item(
        "estimates",
        (0..res.deltas.len())
            .map(|m| res.estimate(m).as_slice().to_vec())
            .collect::<Vec<_>>(),
    )?;
    dict.set_item("objective", res.objective)?;
    dict.set_item("max_constraint_violation", res.max_constraint_violation)?;
    dict.set_item("converged", res.converged)?;
    dict.set_item("iterations", res.iterations)?;
    Ok(dict.unbind().into_any())
}

#[pyfunction]
fn project_unit_ball(v: Vec<f64>) -> Vec<f64> {
    project_rs(&DVector::from_column_slice(&v))
        .as_slice()
        .to_vec()
}

#[pyfunction(name = "sample_sphere")]
fn sample_sphere_py(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_sphere(d, &mut rng).as_slice().to_vec()
}

#[pyfunction(name = "perturb_sparse")]
fn perturb_sparse_py(base: Vec<f64>, s: usize, seed: u64) -> PyResult<Vec<f64>> {
    if s > base.len() {
        return Err(PyValueError::new_err("s exceeds the dimension"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(perturb_sparse(&DVector::from_column_slice(&base), s, &mut rng)
        .as_slice()
        .to_vec())
}

/// Returns `(tasks, global, per_task)` drawn from the sparse-heterogeneity
/// generator with Gaussian noise.
#[pyfunction]
#[pyo3(signature = (d, tasks, s, n, sigma, seed))]
fn gen_tasks(
    d: usize,
    tasks: usize,
    s: usize,
    n: usize,
    sigma: f64,
    seed: u64,
) -> PyResult<(Vec<PyTaskDataset>, Vec<f64>, Vec<Vec<f64>>)> {
    let spec = SynthRegressionSpec {
        dim: d,
        tasks,
        sparsity: s,
        sizes: TaskSizes::Shared(n),
        noise: NoiseFamily::Gaussian { sigma },
        covariance: ContextSpec::StandardGaussian,
        seed,
    };
    let (datasets, truth) = gen_regression_tasks(&spec).map_err(to_py_err)?;
    Ok((
        datasets
            .into_iter()
            .map(|inner| PyTaskDataset { inner })
            .collect(),
        truth.global.as_slice().to_vec(),
        truth
            .per_task
            .iter()
            .map(|v| v.as_slice().to_vec())
            .collect(),
    ))
}

/// Simulates one episode and returns `(final_regrets, activation_counts)`.
#[pyfunction]
#[pyo3(signature = (d, k, m, horizon, s, sigma, seed, policy="molarb", h0=1,
                     probs=None, c_gamma=1.4, c_lambda=0.025, dimension_factor=2.0, world_seed=0))]
#[allow(clippy::too_many_arguments)]
fn bandit_episode(
    d: usize,
    k: usize,
    m: usize,
    horizon: usize,
    s: usize,
    sigma: f64,
    seed: u64,
    policy: &str,
    h0: usize,
    probs: Option<Vec<f64>>,
    c_gamma: f64,
    c_lambda: f64,
    dimension_factor: f64,
    world_seed: u64,
) -> PyResult<(Vec<f64>, Vec<usize>)> {
    let spec = BanditWorldSpec {
        model: BanditModel::ModelC,
        dim: d,
        arms: k,
        instances: m,
        horizon,
        sparsity: s,
        activation: match probs {
            Some(p) => ActivationSpec::Fixed(p),
            None => ActivationSpec::Uniform,
        },
        context: ContextSpec::StandardGaussian,
        noise_scale: sigma,
        seed: world_seed,
    };
    let world = gen_bandit_world(&spec).map_err(to_py_err)?;
    let policy = match policy {
        "molarb" => PolicySpec::MolarBandit {
            option: MolarOption::HardThreshold,
            c_gamma,
            schedule: ThresholdSchedule::SqrtLog,
        },
        "olsb" => PolicySpec::OlsBandit,
        "lassob" => PolicySpec::LassoBandit { c_lambda },
        "rmb" => PolicySpec::RobustMultitaskBandit {
            trim_fraction: 0.1,
            c_lambda,
        },
        "oracle" => PolicySpec::Oracle,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown policy {other:?}"
            )))
        }
    };
    let schedule = build_schedule(horizon, h0).map_err(to_py_err)?;
    let rule = EligibilityRule::dimension_multiple(dimension_factor);
    let trace = run_episode(&world, &policy, &schedule, &rule, seed).map_err(to_py_err)?;
    let finals = (0..m).map(|i| trace.final_regret(i)).collect();
    Ok((finals, trace.activation_counts))
}

#[pymodule]
fn molar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTaskDataset>()?;
    m.add_class::<PyOlsFit>()?;
    m.add_class::<PyMolarResult>()?;
    m.add_function(wrap_pyfunction!(soft_shrink, m)?)?;
    m.add_function(wrap_pyfunction!(coordinatewise_median, m)?)?;
    m.add_function(wrap_pyfunction!(trimmed_mean, m)?)?;
    m.add_function(wrap_pyfunction!(ols_fit, m)?)?;
    m.add_function(wrap_pyfunction!(lasso_fit, m)?)?;
    m.add_function(wrap_pyfunction!(select_tau_py, m)?)?;
    m.add_function(wrap_pyfunction!(molar_fit, m)?)?;
    m.add_function(wrap_pyfunction!(pooled_ols_fit, m)?)?;
    m.add_function(wrap_pyfunction!(robust_multitask_fit, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(project_unit_ball, m)?)?;
    m.add_function(wrap_pyfunction!(sample_sphere_py, m)?)?;
    m.add_function(wrap_pyfunction!(perturb_sparse_py, m)?)?;
    m.add_function(wrap_pyfunction!(gen_tasks, m)?)?;
    m.add_function(wrap_pyfunction!(bandit_episode, m)?)?;
    Ok(())
}
