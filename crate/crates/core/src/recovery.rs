//! Noiseless high-dimensional multitask recovery.
//!
//! Decomposes per-task parameters into a shared vector plus sparse per-task
//! deltas by minimizing `sum_m ||v^m||_1` subject to the per-task normal
//! equations `X^mT (X^m (v* + v^m) - Y^m) = 0`. Solved by a two-block ADMM:
//! a joint least-squares step over `(v*, {v^m})` (closed form through cached
//! per-task eigendecompositions), a soft-threshold step on the delta copies,
//! and dual ascent on both constraint sets.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lasso::soft_shrink;
use crate::task::TaskDataset;

#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    pub tasks: Vec<TaskDataset>,
    /// Bound on `max_m ||X^mT (X^m (v*+v^m) - Y^m)||_inf` at convergence.
    pub solver_tolerance: f64,
    pub max_iterations: usize,
    /// ADMM penalty parameter.
    pub step: f64,
    /// Over-relaxation factor.
    pub relaxation: f64,
}

impl RecoveryProblem {
    pub fn new(tasks: Vec<TaskDataset>) -> Self {
        Self {
            tasks,
            solver_tolerance: 1e-8,
            max_iterations: 50_000,
            step: 1.0,
            relaxation: 1.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// Shared component v*.
    pub global: DVector<f64>,
    /// Per-task deltas; the identifiable estimates are `global + deltas[m]`.
    pub deltas: Vec<DVector<f64>>,
    /// `sum_m ||deltas[m]||_1` at the final iterate.
    pub objective: f64,
    /// `max_m ||X^mT (X^m (global + deltas[m]) - Y^m)||_inf`, reported from
    /// the final iterate whether or not the solve converged.
    pub max_constraint_violation: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl RecoveryResult {
    pub fn estimate(&self, m: usize) -> DVector<f64> {
        &self.global + &self.deltas[m]
    }
}

/// `v` if `||v||_2 <= 1`, else `v / ||v||_2`.
pub fn project_unit_ball(v: &DVector<f64>) -> DVector<f64> {
    let norm = v.norm();
    if norm <= 1.0 {
        v.clone()
    } else {
        v / norm
    }
}

struct TaskOperator {
    /// Eigenbasis of the normalized Gram matrix `G = X^T X / n`.
    basis: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    /// `Q^T (X^T Y / n)` in the eigenbasis.
    target: DVector<f64>,
    rows: usize,
}

pub fn multitask_dantzig(problem: &RecoveryProblem) -> Result<RecoveryResult> {
    let tasks = &problem.tasks;
    if tasks.is_empty() {
        return Err(Error::EmptyInput("recovery needs at least one task"));
    }
    let d = tasks[0].dim();
    if tasks.iter().any(|t| t.dim() != d) {
        return Err(Error::ShapeMismatch(
            "recovery tasks disagree on the dimension".into(),
        ));
    }
    if !(problem.step > 0.0) || !(0.0 < problem.relaxation && problem.relaxation < 2.0) {
        return Err(Error::InvalidParameter(
            "need step > 0 and relaxation in (0, 2)".into(),
        ));
    }
    let m_count = tasks.len();

    // Per-task spectral caches; every ADMM operator is diagonal in them.
    let mut ops = Vec::with_capacity(m_count);
    let mut shared = DMatrix::<f64>::zeros(d, d);
    for t in tasks {
        let n = t.len() as f64;
        let gram = t.features.tr_mul(&t.features) / n;
        let xty = t.features.tr_mul(&t.responses) / n;
        let eig = nalgebra::SymmetricEigen::new(gram);
        // sum_m G_m^2 (G_m^2 + I)^{-1}, the normal operator of the v* step
        let weights =
            DVector::from_iterator(d, eig.eigenvalues.iter().map(|&l| l * l / (l * l + 1.0)));
        let scaled = {
            let mut q = eig.eigenvectors.clone();
            for (j, mut col) in q.column_iter_mut().enumerate() {
                col *= weights[j];
            }
            q
        };
        shared += &scaled * eig.eigenvectors.transpose();
        ops.push(TaskOperator {
            target: eig.eigenvectors.tr_mul(&xty),
            basis: eig.eigenvectors,
            eigenvalues: eig.eigenvalues,
            rows: t.len(),
        });
    }
    let shared_eig = nalgebra::SymmetricEigen::new(shared);
    let cutoff = shared_eig.eigenvalues.amax().max(f64::MIN_POSITIVE) * 1e-12;

    let rho = problem.step;
    let alpha = problem.relaxation;
    let mut global = DVector::<f64>::zeros(d);
    let mut vs = vec![DVector::<f64>::zeros(d); m_count];
    let mut zs = vec![DVector::<f64>::zeros(d); m_count];
    let mut us = vec![DVector::<f64>::zeros(d); m_count];
    let mut ws = vec![DVector::<f64>::zeros(d); m_count];

    let mut converged = false;
    let mut iterations = 0;
    while iterations < problem.max_iterations {
        iterations += 1;

        // joint least-squares step on (v*, {v^m})
        let mut rhs = DVector::<f64>::zeros(d);
        let mut cs = Vec::with_capacity(m_count);
        let mut ts = Vec::with_capacity(m_count);
        for (m, op) in ops.iter().enumerate() {
            let c = op.basis.tr_mul(&(-&us[m])) + &op.target; // Q^T (b - u)
            let dvec = op.basis.tr_mul(&(&zs[m] - &ws[m]));
            let mut contrib = DVector::<f64>::zeros(d);
            let mut t = DVector::<f64>::zeros(d);
            for j in 0..d {
                let l = op.eigenvalues[j];
                t[j] = l * c[j] + dvec[j];
                contrib[j] = (l * c[j] - l * l * dvec[j]) / (l * l + 1.0);
            }
            rhs += &op.basis * contrib;
            cs.push(c);
            ts.push(t);
        }
        let mut g = shared_eig.eigenvectors.tr_mul(&rhs);
        for j in 0..d {
            g[j] = if shared_eig.eigenvalues[j] > cutoff {
                g[j] / shared_eig.eigenvalues[j]
            } else {
                0.0
            };
        }
        global = &shared_eig.eigenvectors * g;

        let mut max_dual_change = 0.0f64;
        for (m, op) in ops.iter().enumerate() {
            let s = op.basis.tr_mul(&global);
            let mut v_hat = DVector::<f64>::zeros(d);
            let mut resid = DVector::<f64>::zeros(d);
            for j in 0..d {
                let l = op.eigenvalues[j];
                v_hat[j] = (ts[m][j] - l * l * s[j]) / (l * l + 1.0);
                // G (v* + v^m) - b, all in the eigenbasis
                resid[j] = l * (s[j] + ts[m][j]) / (l * l + 1.0) - op.target[j];
            }
            vs[m] = &op.basis * v_hat;
            // dual ascent on the normal-equation constraint (relaxed)
            us[m] += (&op.basis * resid) * alpha;

            // relaxed soft-threshold step on the delta copy
            let relaxed = &vs[m] * alpha + &zs[m] * (1.0 - alpha);
            let mut z_new = DVector::<f64>::zeros(d);
            for j in 0..d {
                z_new[j] = soft_shrink(relaxed[j] + ws[m][j], 1.0 / rho);
            }
            max_dual_change = max_dual_change.max((&z_new - &zs[m]).amax());
            ws[m] += &relaxed - &z_new;
            zs[m] = z_new;
        }

        if iterations % 10 == 0 {
            let violation = reported_violation(&ops, &global, &zs);
            let split_gap = vs
                .iter()
                .zip(&zs)
                .map(|(v, z)| (v - z).amax())
                .fold(0.0f64, f64::max);
            if violation <= problem.solver_tolerance
                && split_gap <= problem.solver_tolerance
                && rho * max_dual_change <= problem.solver_tolerance
            {
                converged = true;
                break;
            }
        }
    }

    let max_constraint_violation = reported_violation(&ops, &global, &zs);
    let objective = zs.iter().map(|z| z.iter().map(|v| v.abs()).sum::<f64>()).sum();
    Ok(RecoveryResult {
        global,
        deltas: zs,
        objective,
        max_constraint_violation,
        converged,
        iterations,
    })
}

/// Unscaled feasibility of the reported iterate:
/// `max_m ||X^mT (X^m (v* + z^m) - Y^m)||_inf`.
fn reported_violation(ops: &[TaskOperator], global: &DVector<f64>, zs: &[DVector<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (op, z) in ops.iter().zip(zs) {
        let e = op.basis.tr_mul(&(global + z));
        // lambda * e - Q^T b, both in the eigenbasis
        let mut resid = DVector::<f64>::zeros(e.len());
        for j in 0..e.len() {
            resid[j] = op.eigenvalues[j] * e[j] - op.target[j];
        }
        worst = worst.max(((&op.basis * resid) * op.rows as f64).amax());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noiseless_task(id: usize, x: DMatrix<f64>, beta: &DVector<f64>) -> TaskDataset {
        let y = &x * beta;
        TaskDataset::new(id, x, y).unwrap()
    }

    #[test]
    fn project_examples() {
        let inside = DVector::from_column_slice(&[0.3, 0.4]);
        assert_eq!(project_unit_ball(&inside), inside);
        let v = DVector::from_column_slice(&[3.0, 4.0]);
        let p = project_unit_ball(&v);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        assert!(project_unit_ball(&(v * 100.0)).norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn single_square_task_recovers_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = 6;
        let x = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
        let beta = DVector::<f64>::from_fn(d, |i, _| (i as f64 - 2.0) / 3.0);
        let problem = RecoveryProblem::new(vec![noiseless_task(0, x, &beta)]);
        let res = multitask_dantzig(&problem).unwrap();
        assert!(res.converged, "no convergence in {} iters", res.iterations);
        assert!((res.estimate(0) - &beta).amax() < 1e-6);
        assert!(res.objective < 1e-6);
    }

    #[test]
    fn two_single_row_tasks_homogeneous() {
        // X^1 = e1^T, X^2 = e2^T, shared beta: zero deltas are feasible and
        // any nonzero delta raises the objective.
        let beta = DVector::from_column_slice(&[0.8, -0.6]);
        let x1 = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let x2 = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let problem = RecoveryProblem::new(vec![
            noiseless_task(0, x1, &beta),
            noiseless_task(1, x2, &beta),
        ]);
        let res = multitask_dantzig(&problem).unwrap();
        assert!(res.converged);
        assert!(res.objective < 1e-7, "objective {}", res.objective);
        for m in 0..2 {
            let est = res.estimate(m);
            // only the constrained coordinate of each task is identified
            assert!((est[m] - beta[m]).abs() < 1e-6);
        }
    }

    #[test]
    fn objective_bounded_by_feasible_truth() {
        // Y generated from beta + delta with a known sparse delta: the truth
        // is feasible, so the optimum cannot exceed its objective.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 8;
        let n = 4;
        let beta = DVector::<f64>::from_fn(d, |i, _| ((i + 1) as f64 * 0.31).cos() * 0.4);
        let mut total_truth = 0.0;
        let tasks: Vec<TaskDataset> = (0..3)
            .map(|m| {
                let x = DMatrix::<f64>::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
                let mut bm = beta.clone();
                if m == 1 {
                    bm[2] += 0.9;
                    total_truth += 0.9;
                }
                noiseless_task(m, x, &bm)
            })
            .collect();
        let res = multitask_dantzig(&RecoveryProblem::new(tasks)).unwrap();
        assert!(res.converged);
        assert!(
            res.objective <= total_truth + 10.0 * 1e-8 + 1e-9,
            "objective {} exceeds truth {}",
            res.objective,
            total_truth
        );
    }

    #[test]
    fn feasibility_reported_honestly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = 10;
        let beta = DVector::<f64>::from_fn(d, |i, _| (i as f64 * 0.17).sin() * 0.3);
        let tasks: Vec<TaskDataset> = (0..4)
            .map(|m| {
                let x = DMatrix::<f64>::from_fn(6, d, |_, _| StandardNormal.sample(&mut rng));
                noiseless_task(m, x, &beta)
            })
            .collect();
        let problem = RecoveryProblem::new(tasks.clone());
        let res = multitask_dantzig(&problem).unwrap();
        assert!(res.converged);
        // recompute the violation independently from the raw tasks
        let mut worst = 0.0f64;
        for (m, t) in tasks.iter().enumerate() {
            let est = res.estimate(m);
            let r = t.features.tr_mul(&(&t.features * &est - &t.responses));
            worst = worst.max(r.amax());
        }
        assert!(worst <= problem.solver_tolerance * 1.0001, "violation {worst}");
        assert!((res.max_constraint_violation - worst).abs() <= 1e-12 + worst * 1e-6);
    }

    #[test]
    fn scale_equivariance_in_the_responses() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = 6;
        let tasks: Vec<TaskDataset> = (0..2)
            .map(|m| {
                let x = DMatrix::<f64>::from_fn(3, d, |_, _| StandardNormal.sample(&mut rng));
                let beta = DVector::<f64>::from_fn(d, |i, _| if i == m { 0.7 } else { 0.1 });
                noiseless_task(m, x, &beta)
            })
            .collect();
        let res1 = multitask_dantzig(&RecoveryProblem::new(tasks.clone())).unwrap();
        let scaled: Vec<TaskDataset> = tasks
            .iter()
            .map(|t| TaskDataset {
                task_id: t.task_id,
                features: t.features.clone(),
                responses: &t.responses * 3.0,
            })
            .collect();
        let res3 = multitask_dantzig(&RecoveryProblem::new(scaled)).unwrap();
        for m in 0..2 {
            let a = res1.estimate(m) * 3.0;
            let b = res3.estimate(m);
            assert!((a - b).amax() < 1e-5);
        }
    }
}
