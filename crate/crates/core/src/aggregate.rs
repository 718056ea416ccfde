//! Coordinate-wise robust aggregation of coefficient vectors.

use nalgebra::DVector;

use crate::error::{Error, Result};

fn check_shapes(vectors: &[DVector<f64>], what: &'static str) -> Result<usize> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput(what));
    }
    let d = vectors[0].len();
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::ShapeMismatch(format!(
            "{what}: vectors of unequal length"
        )));
    }
    Ok(d)
}

fn median_of(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Sample median per coordinate: middle order statistic for odd counts,
/// midpoint of the two middle order statistics for even counts.
pub fn coordinatewise_median(estimates: &[DVector<f64>]) -> Result<DVector<f64>> {
    let d = check_shapes(estimates, "coordinatewise_median")?;
    let mut column = vec![0.0f64; estimates.len()];
    let mut out = DVector::zeros(d);
    for k in 0..d {
        for (i, v) in estimates.iter().enumerate() {
            column[i] = v[k];
        }
        column.sort_unstable_by(f64::total_cmp);
        out[k] = median_of(&column);
    }
    Ok(out)
}

/// Number of values trimmed per side: `ceil(omega * m)`, with a small guard
/// so FP noise in the product cannot bump an exact integer to the next one.
pub fn trim_count(omega: f64, m: usize) -> usize {
    let x = omega * m as f64;
    if (x - x.round()).abs() < 1e-9 {
        x.round() as usize
    } else {
        x.ceil() as usize
    }
}

/// Per coordinate, drops the `ceil(omega*M)` largest and smallest values and
/// averages the rest.
pub fn trimmed_mean(values: &[DVector<f64>], trim_fraction: f64) -> Result<DVector<f64>> {
    let d = check_shapes(values, "trimmed_mean")?;
    if !(0.0..0.5).contains(&trim_fraction) {
        return Err(Error::InvalidParameter(format!(
            "trim fraction must lie in [0, 0.5), got {trim_fraction}"
        )));
    }
    let m = values.len();
    let t = trim_count(trim_fraction, m);
    if 2 * t >= m {
        return Err(Error::InvalidTrim {
            omega: trim_fraction,
            removed: 2 * t,
            count: m,
        });
    }
    let kept = (m - 2 * t) as f64;
    let mut column = vec![0.0f64; m];
    let mut out = DVector::zeros(d);
    for k in 0..d {
        for (i, v) in values.iter().enumerate() {
            column[i] = v[k];
        }
        column.sort_unstable_by(f64::total_cmp);
        out[k] = column[t..m - t].iter().sum::<f64>() / kept;
    }
    Ok(out)
}
