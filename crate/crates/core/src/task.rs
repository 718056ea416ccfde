//! Per-task dataset container.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One task's design matrix and response vector.
///
/// Rows of `features` are observations; `responses.len()` must equal the row
/// count and every entry must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub task_id: usize,
    pub features: DMatrix<f64>,
    pub responses: DVector<f64>,
}

impl TaskDataset {
    pub fn new(task_id: usize, features: DMatrix<f64>, responses: DVector<f64>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::EmptyInput("task dataset needs at least one row"));
        }
        if features.nrows() != responses.len() {
            return Err(Error::ShapeMismatch(format!(
                "task {task_id}: {} feature rows vs {} responses",
                features.nrows(),
                responses.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) || responses.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "task {task_id}: non-finite entries"
            )));
        }
        Ok(Self {
            task_id,
            features,
            responses,
        })
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    /// Feature dimension d.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_mismatched() {
        let err = TaskDataset::new(0, DMatrix::zeros(0, 2), DVector::zeros(0));
        assert!(matches!(err, Err(Error::EmptyInput(_))));

        let err = TaskDataset::new(1, DMatrix::zeros(3, 2), DVector::zeros(2));
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let mut x = DMatrix::zeros(2, 2);
        x[(0, 0)] = f64::NAN;
        let err = TaskDataset::new(2, x, DVector::zeros(2));
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }
}
