//! Doubling batch schedule.

use crate::error::{Error, Result};

/// Partition of rounds 1..=T into doubling batches. Batch q is stored as a
/// half-open interval `(start, end]`; the first batch is `(0, H0]` and batch
/// q >= 1 is `(2^{q-1} H0, min(2^q H0, T)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchSchedule {
    pub initial_size: usize,
    pub horizon: usize,
    /// `(start_exclusive, end_inclusive)` per batch.
    pub boundaries: Vec<(usize, usize)>,
}

impl BatchSchedule {
    /// Number of batches.
    pub fn count(&self) -> usize {
        self.boundaries.len()
    }
}

pub fn build_schedule(horizon: usize, h0: usize) -> Result<BatchSchedule> {
    if h0 < 1 || h0 > horizon {
        return Err(Error::InvalidHorizon { h0, horizon });
    }
    let mut boundaries = vec![(0, h0.min(horizon))];
    let mut end = h0;
    while end < horizon {
        let next = (end * 2).min(horizon);
        boundaries.push((end, next));
        end = next;
    }
    Ok(BatchSchedule {
        initial_size: h0,
        horizon,
        boundaries,
    })
}
