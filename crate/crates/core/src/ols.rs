//! Ordinary least squares via Householder QR.
//!
//! The fit keeps the diagonal of `(X^T X)^{-1}` (the per-coordinate leverage
//! used to scale shrinkage thresholds) and the residual sum of squares (used
//! for pooled noise estimation). `TaskSummary` additionally carries the Gram
//! matrix and `X^T Y` so downstream solvers can run without the raw rows.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::task::TaskDataset;

/// Relative eigenvalue tolerance below which a Gram matrix is treated as
/// singular. Checked on the squared diagonal ratio of the R factor.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Per-task least squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Coefficient vector of length d.
    pub coefficients: DVector<f64>,
    /// Diagonal of `(X^T X)^{-1}`, strictly positive on success.
    pub leverage_diag: DVector<f64>,
    /// Number of observations n.
    pub sample_size: usize,
    /// `||Y - X beta||^2` at the fitted coefficients.
    pub residual_ss: f64,
}

/// Sufficient statistics for one task: the OLS fit plus the Gram matrix,
/// `X^T Y`, and `||Y||^2`. Enough to run lasso and pooled solvers after the
/// raw design matrix has been dropped.
#[derive(Debug, Clone)]
pub struct TaskSummary {
    pub task_id: usize,
    pub fit: OlsFit,
    pub gram: DMatrix<f64>,
    pub xty: DVector<f64>,
    pub yty: f64,
}

impl TaskSummary {
    pub fn sample_size(&self) -> usize {
        self.fit.sample_size
    }

    pub fn dim(&self) -> usize {
        self.fit.coefficients.len()
    }
}

pub fn ols_fit(data: &TaskDataset) -> Result<OlsFit> {
    ols_fit_with_tol(data, DEFAULT_RANK_TOL)
}

pub fn ols_fit_with_tol(data: &TaskDataset, rank_tol: f64) -> Result<OlsFit> {
    Ok(factorize(data, rank_tol)?.0)
}

/// OLS fit plus Gram-form statistics computed from the same factorization.
pub fn summarize_task(data: &TaskDataset, rank_tol: f64) -> Result<TaskSummary> {
    let (fit, r, qty_top) = factorize(data, rank_tol)?;
    let gram = r.tr_mul(&r);
    let xty = r.tr_mul(&qty_top);
    let yty = data.responses.norm_squared();
    Ok(TaskSummary {
        task_id: data.task_id,
        fit,
        gram,
        xty,
        yty,
    })
}

fn factorize(data: &TaskDataset, rank_tol: f64) -> Result<(OlsFit, DMatrix<f64>, DVector<f64>)> {
    let n = data.len();
    let d = data.dim();
    if n < d {
        return Err(Error::SingularDesign {
            task: Some(data.task_id),
            detail: format!("n = {n} < d = {d}"),
        });
    }
    let qr = data.features.clone().qr();
    let r = qr.r();

    // (min |r_ii| / max |r_ii|)^2 tracks the eigenvalue ratio of the Gram
    // matrix; reject when it falls below the rank tolerance.
    let mut min_diag = f64::INFINITY;
    let mut max_diag = 0.0f64;
    for i in 0..d {
        let v = r[(i, i)].abs();
        min_diag = min_diag.min(v);
        max_diag = max_diag.max(v);
    }
    if max_diag == 0.0 || (min_diag / max_diag).powi(2) < rank_tol {
        return Err(Error::SingularDesign {
            task: Some(data.task_id),
            detail: format!(
                "relative eigenvalue ratio {:.3e} below tolerance {rank_tol:.1e}",
                (min_diag / max_diag).powi(2)
            ),
        });
    }

    let mut qty = data.responses.clone();
    qr.q_tr_mul(&mut qty);
    let qty_top = DVector::from_column_slice(&qty.as_slice()[..d]);
    let residual_ss: f64 = qty.as_slice()[d..].iter().map(|v| v * v).sum();

    let coefficients = r
        .solve_upper_triangular(&qty_top)
        .ok_or_else(|| Error::SingularDesign {
            task: Some(data.task_id),
            detail: "triangular solve failed".to_string(),
        })?;

    // (X^T X)^{-1} = R^{-1} R^{-T}; its diagonal is the squared row norms
    // of R^{-1}.
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(d, d))
        .ok_or_else(|| Error::SingularDesign {
            task: Some(data.task_id),
            detail: "triangular inversion failed".to_string(),
        })?;
    let leverage_diag = DVector::from_iterator(d, (0..d).map(|k| r_inv.row(k).norm_squared()));

    Ok((
        OlsFit {
            coefficients,
            leverage_diag,
            sample_size: n,
            residual_ss,
        },
        r,
        qty_top,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn task(x: DMatrix<f64>, y: DVector<f64>) -> TaskDataset {
        TaskDataset::new(0, x, y).unwrap()
    }

    #[test]
    fn identity_design() {
        let fit = ols_fit(&task(
            DMatrix::identity(2, 2),
            DVector::from_column_slice(&[2.0, 3.0]),
        ))
        .unwrap();
        assert_eq!(fit.coefficients.as_slice(), &[2.0, 3.0]);
        assert_eq!(fit.leverage_diag.as_slice(), &[1.0, 1.0]);
        assert_abs_diff_eq!(fit.residual_ss, 0.0, epsilon = 1e-30);
    }

    #[test]
    fn diagonal_design_hand_solved() {
        // Normal equations: beta = (1, 2), (X^T X)^{-1} = diag(1, 1/4).
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let y = DVector::from_column_slice(&[1.0, 4.0]);
        let fit = ols_fit(&task(x, y)).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.coefficients[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.leverage_diag[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.leverage_diag[1], 0.25, epsilon = 1e-14);
    }

    /// Build an n x d matrix with prescribed condition number via scaled
    /// columns of a random orthogonal-ish basis.
    fn conditioned_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize, cond: f64) -> DMatrix<f64> {
        let a = DMatrix::<f64>::from_fn(n, d, |_, _| StandardNormal.sample(rng));
        let qr = a.qr();
        let q = qr.q();
        let b = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(rng));
        let v = b.qr().q();
        // singular values log-spaced between 1 and 1/cond
        let sv = DVector::from_iterator(
            d,
            (0..d).map(|i| cond.powf(-(i as f64) / (d.max(2) - 1) as f64)),
        );
        &q * DMatrix::from_diagonal(&sv) * v.transpose()
    }

    #[test]
    fn noiseless_exactness_at_condition_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &cond in &[1.0, 1e3, 1e6] {
            let x = conditioned_matrix(&mut rng, 60, 12, cond);
            let beta = DVector::<f64>::from_fn(12, |i, _| (i as f64 * 0.7).sin());
            let y = &x * &beta;
            let fit = ols_fit(&task(x, y)).unwrap();
            let err = (&fit.coefficients - &beta).amax();
            assert!(err <= 1e-8, "cond {cond:.0e}: err {err:.3e}");
        }
    }

    #[test]
    fn leverage_matches_dense_inversion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [1usize, 3, 10] {
            let x = DMatrix::<f64>::from_fn(4 * d + 3, d, |_, _| StandardNormal.sample(&mut rng));
            let y = DVector::<f64>::from_fn(4 * d + 3, |_, _| StandardNormal.sample(&mut rng));
            let fit = ols_fit(&task(x.clone(), y)).unwrap();
            let inv = (x.tr_mul(&x)).try_inverse().unwrap();
            for k in 0..d {
                assert_abs_diff_eq!(fit.leverage_diag[k], inv[(k, k)], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn singular_designs_rejected() {
        // n < d
        let err = ols_fit(&task(DMatrix::zeros(1, 2), DVector::zeros(1)));
        assert!(matches!(err, Err(Error::SingularDesign { .. })));

        // duplicated column
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let err = ols_fit(&task(x, DVector::zeros(3)));
        assert!(matches!(err, Err(Error::SingularDesign { .. })));
    }

    #[test]
    fn summary_matches_direct_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = DMatrix::<f64>::from_fn(20, 4, |_, _| StandardNormal.sample(&mut rng));
        let y = DVector::<f64>::from_fn(20, |_, _| StandardNormal.sample(&mut rng));
        let s = summarize_task(&task(x.clone(), y.clone()), DEFAULT_RANK_TOL).unwrap();
        let gram = x.tr_mul(&x);
        let xty = x.tr_mul(&y);
        assert_abs_diff_eq!(s.yty, y.norm_squared(), epsilon = 1e-10);
        for k in 0..4 {
            assert_abs_diff_eq!(s.xty[k], xty[k], epsilon = 1e-9);
            for j in 0..4 {
                assert_abs_diff_eq!(s.gram[(k, j)], gram[(k, j)], epsilon = 1e-9);
            }
        }
        // residual_ss consistent with the fitted coefficients
        let resid = &y - &x * &s.fit.coefficients;
        assert_abs_diff_eq!(s.fit.residual_ss, resid.norm_squared(), epsilon = 1e-9);
    }
}
