//! Error type shared by every module in this crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The design matrix is rank deficient (or n < d), so the Gram matrix
    /// cannot be inverted at the configured rank tolerance.
    #[error("singular design{}: {detail}", fmt_task(.task))]
    SingularDesign { task: Option<usize>, detail: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("sample sizes must be positive")]
    NonPositiveSize,

    #[error("trim fraction {omega} removes 2*ceil(omega*M) = {removed} of M = {count} values")]
    InvalidTrim {
        omega: f64,
        removed: usize,
        count: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("noise estimation requires residual degrees of freedom, but sum of (n^m - d) is zero")]
    InsufficientDegreesOfFreedom,

    #[error("invalid horizon: need 1 <= H0 <= T, got H0 = {h0}, T = {horizon}")]
    InvalidHorizon { h0: usize, horizon: usize },

    #[error("malformed csv: {0}")]
    MalformedCsv(String),

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("split {split:?} would be empty for task {task:?}")]
    TooFewRows { task: String, split: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn fmt_task(task: &Option<usize>) -> String {
    match task {
        Some(id) => format!(" for task {id}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
