//! L1-penalized least squares by cyclic coordinate descent.
//!
//! Objective: `(1/2n) ||Y - X beta||^2 + lambda ||beta - c||_1` where `c` is
//! an optional shrinkage center (zero if absent). The solver runs on the
//! Gram form `(X^T X, X^T Y)`, so it accepts either a raw dataset or the
//! sufficient statistics kept by `TaskSummary`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::task::TaskDataset;

/// `sign(x) * max(|x| - lambda, 0)`.
pub fn soft_shrink(x: f64, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct LassoConfig {
    /// Penalty weight lambda, >= 0.
    pub penalty: f64,
    /// Convergence threshold on the maximum coefficient change per sweep.
    pub tolerance: f64,
    /// Maximum number of full coordinate sweeps.
    pub max_iterations: usize,
    /// Shrinkage target; the penalty is on `beta - center_offset`.
    pub center_offset: Option<DVector<f64>>,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            penalty: 0.0,
            tolerance: 1e-7,
            max_iterations: 10_000,
            center_offset: None,
        }
    }
}

impl LassoConfig {
    pub fn with_penalty(penalty: f64) -> Self {
        Self {
            penalty,
            ..Self::default()
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.penalty < 0.0 || !self.penalty.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lasso penalty must be finite and >= 0, got {}",
                self.penalty
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "lasso tolerance must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "lasso max_iterations must be >= 1".into(),
            ));
        }
        if let Some(c) = &self.center_offset {
            if c.len() != d {
                return Err(Error::ShapeMismatch(format!(
                    "center_offset length {} vs dimension {d}",
                    c.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LassoFit {
    pub coefficients: DVector<f64>,
    /// False when `max_iterations` ran out before the sweep change fell
    /// below tolerance; the best iterate is still returned.
    pub converged: bool,
    pub sweeps: usize,
    /// Objective value after each sweep, for monotonicity diagnostics.
    pub objective_trace: Vec<f64>,
}

pub fn lasso_fit(data: &TaskDataset, config: &LassoConfig) -> Result<LassoFit> {
    let gram = data.features.tr_mul(&data.features);
    let xty = data.features.tr_mul(&data.responses);
    let yty = data.responses.norm_squared();
    lasso_fit_from_stats(&gram, &xty, yty, data.len(), config, None)
}

/// Gram-form coordinate descent. `warm_start` seeds the iterate (defaults to
/// the center, i.e. a zero-initialized penalized part).
pub fn lasso_fit_from_stats(
    gram: &DMatrix<f64>,
    xty: &DVector<f64>,
    yty: f64,
    n: usize,
    config: &LassoConfig,
    warm_start: Option<&DVector<f64>>,
) -> Result<LassoFit> {
    let d = xty.len();
    if gram.nrows() != d || gram.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "gram is {}x{}, expected {d}x{d}",
            gram.nrows(),
            gram.ncols()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyInput("lasso needs at least one observation"));
    }
    config.validate(d)?;

    let nf = n as f64;
    let lambda = config.penalty;

    // Work on theta = beta - center: the data term becomes a lasso with
    // rhs  b = X^T Y - G c  and constant  r0 = ||Y - X c||^2.
    let (b, r0) = match &config.center_offset {
        Some(c) => {
            let gc = gram * c;
            let b = xty - &gc;
            let r0 = yty - 2.0 * xty.dot(c) + c.dot(&gc);
            (b, r0)
        }
        None => (xty.clone(), yty),
    };

    let mut theta = match (warm_start, &config.center_offset) {
        (Some(w), Some(c)) => w - c,
        (Some(w), None) => w.clone(),
        (None, _) => DVector::zeros(d),
    };
    let mut g_theta = gram * &theta;

    let objective = |theta: &DVector<f64>, g_theta: &DVector<f64>| -> f64 {
        (theta.dot(g_theta) - 2.0 * b.dot(theta) + r0) / (2.0 * nf)
            + lambda * theta.iter().map(|v| v.abs()).sum::<f64>()
    };

    let mut trace = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    for sweep in 0..config.max_iterations {
        sweeps = sweep + 1;
        let mut max_change = 0.0f64;
        for k in 0..d {
            let gkk = gram[(k, k)];
            if gkk <= 0.0 {
                continue;
            }
            let old = theta[k];
            let rest = g_theta[k] - gkk * old;
            let z = (b[k] - rest) / nf;
            let new = soft_shrink(z, lambda) * nf / gkk;
            if new != old {
                let delta = new - old;
                g_theta.axpy(delta, &gram.column(k).into_owned(), 1.0);
                theta[k] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        // refresh the cached product periodically to stop drift
        if sweep % 128 == 127 {
            g_theta = gram * &theta;
        }
        trace.push(objective(&theta, &g_theta));
        if max_change < config.tolerance {
            converged = true;
            break;
        }
    }

    let coefficients = match &config.center_offset {
        Some(c) => &theta + c,
        None => theta,
    };
    Ok(LassoFit {
        coefficients,
        converged,
        sweeps,
        objective_trace: trace,
    })
}

/// The rate-driven penalty `lambda^m = c_lambda * sqrt(ln(n*d) / n)` used by
/// the lasso and robust-multitask baselines.
pub fn rate_penalty(c_lambda: f64, n: usize, d: usize) -> f64 {
    let nd = (n as f64) * (d as f64);
    c_lambda * (nd.ln().max(0.0) / n as f64).sqrt()
}
