//! Which instances have gathered enough fresh observations to refit safely.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EligibilityMode {
    /// `max(d+1, ceil(2 c_b (ln(MT) + d ln(max(L ln(K)/mu, e)))))`.
    TheoryForm,
    /// `max(d+1, ceil(dimension_factor * d))`.
    DimensionMultiple,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EligibilityRule {
    pub mode: EligibilityMode,
    pub c_b: f64,
    pub dimension_factor: f64,
}

impl Default for EligibilityRule {
    fn default() -> Self {
        Self {
            mode: EligibilityMode::DimensionMultiple,
            c_b: 1.0,
            dimension_factor: 2.0,
        }
    }
}

impl EligibilityRule {
    pub fn dimension_multiple(factor: f64) -> Self {
        Self {
            mode: EligibilityMode::DimensionMultiple,
            dimension_factor: factor,
            ..Self::default()
        }
    }
}

/// Observation count an instance must reach before it may refit. Always at
/// least d + 1.
#[allow(clippy::too_many_arguments)]
pub fn eligibility_threshold(
    rule: &EligibilityRule,
    instances: usize,
    horizon: usize,
    d: usize,
    l: f64,
    arms: usize,
    mu: f64,
) -> usize {
    let floor = d + 1;
    match rule.mode {
        EligibilityMode::DimensionMultiple => floor.max((rule.dimension_factor * d as f64).ceil() as usize),
        EligibilityMode::TheoryForm => {
            let mt = (instances as f64 * horizon as f64).max(1.0);
            let inner = (l * (arms as f64).ln() / mu).max(std::f64::consts::E);
            let raw = 2.0 * rule.c_b * (mt.ln() + d as f64 * inner.ln());
            floor.max(raw.ceil() as usize)
        }
    }
}

/// Instances whose buffer counts reach the threshold, in index order.
#[allow(clippy::too_many_arguments)]
pub fn eligibility_set(
    counts: &[usize],
    rule: &EligibilityRule,
    instances: usize,
    horizon: usize,
    d: usize,
    l: f64,
    arms: usize,
    mu: f64,
) -> Vec<usize> {
    let threshold = eligibility_threshold(rule, instances, horizon, d, l, arms, mu);
    counts
        .iter()
        .enumerate()
        .filter_map(|(m, &c)| (c >= threshold).then_some(m))
        .collect()
}
