//! Episode simulation with exact per-instance regret accounting.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::eligibility::{eligibility_set, EligibilityRule};
use super::rng::EnvStreams;
use super::schedule::BatchSchedule;
use super::world::{BanditModel, BanditWorld, ContextSpec, WorldParams};
use crate::error::{Error, Result};
use crate::lasso::{lasso_fit_from_stats, rate_penalty, LassoConfig};
use crate::molar::{
    molar_fit_from_fits, MolarConfig, MolarOption, NoiseScale, ThresholdSchedule,
};
use crate::ols::{ols_fit, OlsFit};
use crate::task::TaskDataset;

#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// Median-shrinkage refits pooled over the eligible instances.
    MolarBandit {
        option: MolarOption,
        c_gamma: f64,
        schedule: ThresholdSchedule,
    },
    /// Independent per-instance least squares.
    OlsBandit,
    /// Independent per-instance lasso with `lambda = c_lambda sqrt(ln(nd)/n)`.
    LassoBandit { c_lambda: f64 },
    /// Trimmed-mean center plus l1 shrinkage towards it.
    RobustMultitaskBandit { trim_fraction: f64, c_lambda: f64 },
    /// Estimates pinned at the truth; never refits. Diagnostic only.
    Oracle,
}

impl PolicySpec {
    pub fn id(&self) -> &'static str {
        match self {
            PolicySpec::MolarBandit { .. } => "molarb",
            PolicySpec::OlsBandit => "olsb",
            PolicySpec::LassoBandit { .. } => "lassob",
            PolicySpec::RobustMultitaskBandit { .. } => "rmb",
            PolicySpec::Oracle => "oracle",
        }
    }
}

/// One refit attempt at a batch boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefitEvent {
    pub batch: usize,
    pub eligible: Vec<usize>,
    /// Tau used by the pooled median refit, when one ran.
    pub tau: Option<usize>,
    /// `(instance, observations consumed)` for cleared buffers.
    pub refit_counts: Vec<(usize, usize)>,
    /// Eligible instances whose refit failed; they keep their estimates and
    /// carry their buffers.
    pub failed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    /// Entry `[m][t-1]` is the cumulative regret of instance m after round t.
    pub per_instance_cumulative: Vec<Vec<f64>>,
    pub activation_counts: Vec<usize>,
    pub batch_refit_log: Vec<RefitEvent>,
    /// Buffered observations never consumed by a refit, per instance.
    pub final_buffer_counts: Vec<usize>,
    pub seed: u64,
}

impl RegretTrace {
    pub fn instances(&self) -> usize {
        self.per_instance_cumulative.len()
    }

    pub fn horizon(&self) -> usize {
        self.per_instance_cumulative.first().map_or(0, Vec::len)
    }

    pub fn final_regret(&self, instance: usize) -> f64 {
        *self.per_instance_cumulative[instance].last().unwrap()
    }
}

/// Smallest-eigenvalue ratio `lambda_min(X^T X) / n` of one eligible
/// instance's buffer at a refit.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenRecord {
    pub batch: usize,
    pub instance: usize,
    pub ratio: f64,
}

/// `lambda_min(X^T X) / n` for a row buffer.
pub fn gram_min_eigen_ratio(features: &DMatrix<f64>) -> f64 {
    let gram = features.tr_mul(features);
    nalgebra::SymmetricEigen::new(gram).eigenvalues.min() / features.nrows() as f64
}

fn argmax_tie_break(scores: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..scores.len()).filter(|&a| scores[a] == best).collect();
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    }
}

/// Greedy arm choice for per-arm contexts, breaking exact ties uniformly at
/// random from the supplied stream.
pub fn choose_arm(contexts: &[DVector<f64>], estimate: &DVector<f64>, rng: &mut ChaCha8Rng) -> usize {
    let scores: Vec<f64> = contexts.iter().map(|x| x.dot(estimate)).collect();
    argmax_tie_break(&scores, rng)
}

/// Greedy arm choice for a shared context and per-arm estimates.
pub fn choose_arm_shared(
    context: &DVector<f64>,
    arm_estimates: &[DVector<f64>],
    rng: &mut ChaCha8Rng,
) -> usize {
    let scores: Vec<f64> = arm_estimates.iter().map(|b| context.dot(b)).collect();
    argmax_tie_break(&scores, rng)
}

/// Growing row buffer for one instance (Model-C) or one instance-arm pair
/// (Model-P).
#[derive(Debug, Clone, Default)]
struct Buffer {
    rows: Vec<f64>,
    ys: Vec<f64>,
}

impl Buffer {
    fn len(&self) -> usize {
        self.ys.len()
    }

    fn push(&mut self, x: &DVector<f64>, y: f64) {
        self.rows.extend_from_slice(x.as_slice());
        self.ys.push(y);
    }

    fn to_dataset(&self, task_id: usize, d: usize) -> TaskDataset {
        TaskDataset {
            task_id,
            features: DMatrix::from_row_slice(self.len(), d, &self.rows),
            responses: DVector::from_column_slice(&self.ys),
        }
    }

    fn clear(&mut self) {
        self.rows.clear();
        self.ys.clear();
    }
}

struct EpisodeState {
    /// `[m]` for Model-C, flattened `[m][a]` for Model-P.
    estimates: Vec<Vec<DVector<f64>>>,
    buffers: Vec<Vec<Buffer>>,
}

pub fn run_episode(
    world: &BanditWorld,
    policy: &PolicySpec,
    schedule: &BatchSchedule,
    rule: &EligibilityRule,
    seed: u64,
) -> Result<RegretTrace> {
    run_episode_inner(world, policy, schedule, rule, seed, None)
}

/// Runs an episode while recording `lambda_min(X^T X)/n` of each eligible
/// instance's buffer at every refit.
pub fn min_eigen_probe(
    world: &BanditWorld,
    policy: &PolicySpec,
    schedule: &BatchSchedule,
    rule: &EligibilityRule,
    seed: u64,
) -> Result<Vec<EigenRecord>> {
    let mut records = Vec::new();
    run_episode_inner(world, policy, schedule, rule, seed, Some(&mut records))?;
    Ok(records)
}

fn run_episode_inner(
    world: &BanditWorld,
    policy: &PolicySpec,
    schedule: &BatchSchedule,
    rule: &EligibilityRule,
    seed: u64,
    mut probe: Option<&mut Vec<EigenRecord>>,
) -> Result<RegretTrace> {
    world.validate()?;
    if schedule.horizon != world.horizon {
        return Err(Error::ShapeMismatch(format!(
            "schedule horizon {} vs world horizon {}",
            schedule.horizon, world.horizon
        )));
    }
    let m_count = world.instances;
    let d = world.dim;
    let k = world.arms;
    let per_arm_state = matches!(world.model, BanditModel::ModelP);
    let slots = if per_arm_state { k } else { 1 };

    let mut streams = EnvStreams::new(seed);
    let sd = world.context_spec.std_dev();

    let mut state = EpisodeState {
        estimates: (0..m_count)
            .map(|m| init_estimates(world, policy, m, slots))
            .collect(),
        buffers: vec![vec![Buffer::default(); slots]; m_count],
    };

    let mut cumulative = vec![vec![0.0f64; world.horizon]; m_count];
    let mut running = vec![0.0f64; m_count];
    let mut activation_counts = vec![0usize; m_count];
    let mut refit_log = Vec::new();

    let mut context = DVector::<f64>::zeros(d);
    let mut contexts: Vec<DVector<f64>> = vec![DVector::zeros(d); k];

    let batches = schedule.boundaries.len();
    for (q, &(lo, hi)) in schedule.boundaries.iter().enumerate() {
        for t in lo + 1..=hi {
            // one activation draw per instance per round, policy-independent
            let active: Vec<bool> = world
                .activation_probs
                .iter()
                .map(|&p| streams.activation.random::<f64>() < p)
                .collect();
            for m in 0..m_count {
                if !active[m] {
                    cumulative[m][t - 1] = running[m];
                    continue;
                }
                activation_counts[m] += 1;
                let noise: f64 = {
                    let z: f64 = StandardNormal.sample(&mut streams.noise);
                    world.noise_scale * z
                };
                let inc = match world.model {
                    BanditModel::ModelC => {
                        for x in contexts.iter_mut() {
                            fill_gaussian(x, sd, &mut streams.contexts);
                        }
                        let beta = match &world.true_params {
                            WorldParams::Shared(b) => &b[m],
                            _ => unreachable!(),
                        };
                        let arm = choose_arm(&contexts, &state.estimates[m][0], &mut streams.tie_break);
                        let chosen_mean = contexts[arm].dot(beta);
                        let best_mean = contexts
                            .iter()
                            .map(|x| x.dot(beta))
                            .fold(f64::NEG_INFINITY, f64::max);
                        state.buffers[m][0].push(&contexts[arm], chosen_mean + noise);
                        best_mean - chosen_mean
                    }
                    BanditModel::ModelP => {
                        fill_gaussian(&mut context, sd, &mut streams.contexts);
                        let betas = match &world.true_params {
                            WorldParams::PerArm(b) => &b[m],
                            _ => unreachable!(),
                        };
                        let arm =
                            choose_arm_shared(&context, &state.estimates[m], &mut streams.tie_break);
                        let chosen_mean = context.dot(&betas[arm]);
                        let best_mean = betas
                            .iter()
                            .map(|b| context.dot(b))
                            .fold(f64::NEG_INFINITY, f64::max);
                        state.buffers[m][arm].push(&context, chosen_mean + noise);
                        best_mean - chosen_mean
                    }
                };
                running[m] += inc;
                cumulative[m][t - 1] = running[m];
            }
        }

        // Round T is a terminal boundary: estimates would never be used, so
        // the final batch does not refit.
        if q + 1 == batches || matches!(policy, PolicySpec::Oracle) {
            continue;
        }
        let event = refit(world, policy, rule, &mut state, q, probe.as_deref_mut())?;
        refit_log.push(event);
    }

    Ok(RegretTrace {
        per_instance_cumulative: cumulative,
        activation_counts,
        batch_refit_log: refit_log,
        final_buffer_counts: state
            .buffers
            .iter()
            .map(|slots| slots.iter().map(Buffer::len).sum())
            .collect(),
        seed,
    })
}

fn init_estimates(
    world: &BanditWorld,
    policy: &PolicySpec,
    m: usize,
    slots: usize,
) -> Vec<DVector<f64>> {
    match (policy, &world.true_params) {
        (PolicySpec::Oracle, WorldParams::Shared(b)) => vec![b[m].clone()],
        (PolicySpec::Oracle, WorldParams::PerArm(b)) => b[m].clone(),
        _ => vec![DVector::zeros(world.dim); slots],
    }
}

fn fill_gaussian(v: &mut DVector<f64>, sd: f64, rng: &mut ChaCha8Rng) {
    for entry in v.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *entry = sd * z;
    }
}

fn refit(
    world: &BanditWorld,
    policy: &PolicySpec,
    rule: &EligibilityRule,
    state: &mut EpisodeState,
    batch: usize,
    probe: Option<&mut Vec<EigenRecord>>,
) -> Result<RefitEvent> {
    let d = world.dim;
    let counts: Vec<usize> = state
        .buffers
        .iter()
        .map(|slots| slots.iter().map(Buffer::len).sum())
        .collect();
    // L and mu enter only the theory-form threshold; they are distribution
    // constants, taken here from the Gaussian context scale.
    let scale = match world.context_spec {
        ContextSpec::StandardGaussian => 1.0,
        ContextSpec::ScaledGaussian { scale } => scale,
    };
    let eligible = eligibility_set(
        &counts,
        rule,
        world.instances,
        world.horizon,
        d,
        scale,
        world.arms,
        scale / 16.0,
    );

    if let Some(records) = probe {
        for &m in &eligible {
            let mut rows = Vec::new();
            for slot in &state.buffers[m] {
                rows.extend_from_slice(&slot.rows);
            }
            let n = rows.len() / d;
            if n > 0 {
                let x = DMatrix::from_row_slice(n, d, &rows);
                records.push(EigenRecord {
                    batch,
                    instance: m,
                    ratio: gram_min_eigen_ratio(&x),
                });
            }
        }
    }

    let mut event = RefitEvent {
        batch,
        eligible: eligible.clone(),
        tau: None,
        refit_counts: Vec::new(),
        failed: Vec::new(),
    };
    if eligible.is_empty() {
        return Ok(event);
    }

    match world.model {
        BanditModel::ModelC => refit_model_c(world, policy, state, &eligible, &mut event)?,
        BanditModel::ModelP => refit_model_p(world, policy, state, &eligible, &mut event)?,
    }
    Ok(event)
}

fn molar_config_for(policy: &PolicySpec, sigma: f64) -> MolarConfig {
    match policy {
        PolicySpec::MolarBandit {
            option,
            c_gamma,
            schedule,
        } => MolarConfig {
            option: *option,
            c_gamma: *c_gamma,
            noise_scale: NoiseScale::Known(sigma),
            tau_override: None,
            schedule: *schedule,
        },
        _ => unreachable!("molar config requested for a non-molar policy"),
    }
}

fn refit_model_c(
    world: &BanditWorld,
    policy: &PolicySpec,
    state: &mut EpisodeState,
    eligible: &[usize],
    event: &mut RefitEvent,
) -> Result<()> {
    let d = world.dim;
    match policy {
        PolicySpec::OlsBandit => {
            for &m in eligible {
                let data = state.buffers[m][0].to_dataset(m, d);
                match ols_fit(&data) {
                    Ok(fit) => {
                        state.estimates[m][0] = fit.coefficients;
                        event.refit_counts.push((m, data.len()));
                        state.buffers[m][0].clear();
                    }
                    Err(Error::SingularDesign { .. }) => event.failed.push(m),
                    Err(e) => return Err(e),
                }
            }
        }
        PolicySpec::LassoBandit { c_lambda } => {
            for &m in eligible {
                let buf = &state.buffers[m][0];
                let x = DMatrix::from_row_slice(buf.len(), d, &buf.rows);
                let y = DVector::from_column_slice(&buf.ys);
                let cfg = LassoConfig::with_penalty(rate_penalty(*c_lambda, buf.len(), d));
                let fit = lasso_fit_from_stats(
                    &x.tr_mul(&x),
                    &x.tr_mul(&y),
                    y.norm_squared(),
                    buf.len(),
                    &cfg,
                    Some(&state.estimates[m][0]),
                )?;
                state.estimates[m][0] = fit.coefficients;
                event.refit_counts.push((m, buf.len()));
                state.buffers[m][0].clear();
            }
        }
        PolicySpec::MolarBandit { .. } => {
            let mut survivors = Vec::new();
            let mut fits: Vec<OlsFit> = Vec::new();
            for &m in eligible {
                let data = state.buffers[m][0].to_dataset(m, d);
                match ols_fit(&data) {
                    Ok(fit) => {
                        survivors.push(m);
                        fits.push(fit);
                    }
                    Err(Error::SingularDesign { .. }) => event.failed.push(m),
                    Err(e) => return Err(e),
                }
            }
            if !survivors.is_empty() {
                let cfg = molar_config_for(policy, world.noise_scale);
                let res = molar_fit_from_fits(&fits, &cfg)?;
                event.tau = Some(res.tau);
                for (i, &m) in survivors.iter().enumerate() {
                    state.estimates[m][0] = res.task_estimates[i].clone();
                    event.refit_counts.push((m, state.buffers[m][0].len()));
                    state.buffers[m][0].clear();
                }
            }
        }
        PolicySpec::RobustMultitaskBandit {
            trim_fraction,
            c_lambda,
        } => {
            let mut survivors = Vec::new();
            let mut fits: Vec<OlsFit> = Vec::new();
            for &m in eligible {
                let data = state.buffers[m][0].to_dataset(m, d);
                match ols_fit(&data) {
                    Ok(fit) => {
                        survivors.push(m);
                        fits.push(fit);
                    }
                    Err(Error::SingularDesign { .. }) => event.failed.push(m),
                    Err(e) => return Err(e),
                }
            }
            if !survivors.is_empty() {
                let estimates: Vec<DVector<f64>> =
                    fits.iter().map(|f| f.coefficients.clone()).collect();
                // fall back to the plain mean when the survivor count is too
                // small for the configured trim
                let omega = feasible_trim(*trim_fraction, survivors.len());
                let center = crate::aggregate::trimmed_mean(&estimates, omega)?;
                for (i, &m) in survivors.iter().enumerate() {
                    let buf = &state.buffers[m][0];
                    let x = DMatrix::from_row_slice(buf.len(), d, &buf.rows);
                    let y = DVector::from_column_slice(&buf.ys);
                    let cfg = LassoConfig {
                        penalty: rate_penalty(*c_lambda, buf.len(), d),
                        center_offset: Some(center.clone()),
                        ..LassoConfig::default()
                    };
                    let fit = lasso_fit_from_stats(
                        &x.tr_mul(&x),
                        &x.tr_mul(&y),
                        y.norm_squared(),
                        buf.len(),
                        &cfg,
                        Some(&fits[i].coefficients),
                    )?;
                    state.estimates[m][0] = fit.coefficients;
                    event.refit_counts.push((m, buf.len()));
                    state.buffers[m][0].clear();
                }
            }
        }
        PolicySpec::Oracle => {}
    }
    Ok(())
}

fn feasible_trim(omega: f64, count: usize) -> f64 {
    if 2 * crate::aggregate::trim_count(omega, count) >= count {
        0.0
    } else {
        omega
    }
}

fn refit_model_p(
    world: &BanditWorld,
    policy: &PolicySpec,
    state: &mut EpisodeState,
    eligible: &[usize],
    event: &mut RefitEvent,
) -> Result<()> {
    let d = world.dim;
    let k = world.arms;

    // An instance survives only if every arm can be refit; otherwise it
    // keeps all its estimates and carries all its buffers.
    let needs_ols = !matches!(policy, PolicySpec::LassoBandit { .. });
    let mut survivors: Vec<usize> = Vec::new();
    let mut arm_fits: Vec<Vec<OlsFit>> = Vec::new();
    for &m in eligible {
        if matches!(policy, PolicySpec::Oracle) {
            continue;
        }
        if state.buffers[m].iter().any(|b| b.len() == 0) {
            event.failed.push(m);
            continue;
        }
        if needs_ols {
            let fits: std::result::Result<Vec<OlsFit>, ()> = (0..k)
                .map(|a| ols_fit(&state.buffers[m][a].to_dataset(m, d)).map_err(|_| ()))
                .collect();
            match fits {
                Ok(f) => {
                    survivors.push(m);
                    arm_fits.push(f);
                }
                Err(()) => event.failed.push(m),
            }
        } else {
            survivors.push(m);
        }
    }
    if survivors.is_empty() {
        return Ok(());
    }

    match policy {
        PolicySpec::OlsBandit => {
            for (i, &m) in survivors.iter().enumerate() {
                for a in 0..k {
                    state.estimates[m][a] = arm_fits[i][a].coefficients.clone();
                }
            }
        }
        PolicySpec::MolarBandit { .. } => {
            let cfg = molar_config_for(policy, world.noise_scale);
            for a in 0..k {
                let fits: Vec<OlsFit> = arm_fits.iter().map(|f| f[a].clone()).collect();
                let res = molar_fit_from_fits(&fits, &cfg)?;
                if event.tau.is_none() {
                    event.tau = Some(res.tau);
                }
                for (i, &m) in survivors.iter().enumerate() {
                    state.estimates[m][a] = res.task_estimates[i].clone();
                }
            }
        }
        PolicySpec::LassoBandit { c_lambda } => {
            for &m in &survivors {
                for a in 0..k {
                    let buf = &state.buffers[m][a];
                    let x = DMatrix::from_row_slice(buf.len(), d, &buf.rows);
                    let y = DVector::from_column_slice(&buf.ys);
                    let cfg = LassoConfig::with_penalty(rate_penalty(*c_lambda, buf.len(), d));
                    let fit = lasso_fit_from_stats(
                        &x.tr_mul(&x),
                        &x.tr_mul(&y),
                        y.norm_squared(),
                        buf.len(),
                        &cfg,
                        Some(&state.estimates[m][a]),
                    )?;
                    state.estimates[m][a] = fit.coefficients;
                }
            }
        }
        PolicySpec::RobustMultitaskBandit {
            trim_fraction,
            c_lambda,
        } => {
            let omega = feasible_trim(*trim_fraction, survivors.len());
            for a in 0..k {
                let estimates: Vec<DVector<f64>> = arm_fits
                    .iter()
                    .map(|f| f[a].coefficients.clone())
                    .collect();
                let center = crate::aggregate::trimmed_mean(&estimates, omega)?;
                for (i, &m) in survivors.iter().enumerate() {
                    let buf = &state.buffers[m][a];
                    let x = DMatrix::from_row_slice(buf.len(), d, &buf.rows);
                    let y = DVector::from_column_slice(&buf.ys);
                    let cfg = LassoConfig {
                        penalty: rate_penalty(*c_lambda, buf.len(), d),
                        center_offset: Some(center.clone()),
                        ..LassoConfig::default()
                    };
                    let fit = lasso_fit_from_stats(
                        &x.tr_mul(&x),
                        &x.tr_mul(&y),
                        y.norm_squared(),
                        buf.len(),
                        &cfg,
                        Some(&arm_fits[i][a].coefficients),
                    )?;
                    state.estimates[m][a] = fit.coefficients;
                }
            }
        }
        PolicySpec::Oracle => {}
    }

    for &m in &survivors {
        let consumed: usize = state.buffers[m].iter().map(Buffer::len).sum();
        event.refit_counts.push((m, consumed));
        for buf in state.buffers[m].iter_mut() {
            buf.clear();
        }
    }
    Ok(())
}

/// Per-instance mean and standard error of the cumulative regret at every
/// round, across traces (typically one per seed).
#[derive(Debug, Clone)]
pub struct RegretSummary {
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

pub fn regret_summary(traces: &[RegretTrace]) -> Result<RegretSummary> {
    if traces.is_empty() {
        return Err(Error::EmptyInput("regret_summary needs traces"));
    }
    let m = traces[0].instances();
    let t = traces[0].horizon();
    if traces.iter().any(|tr| tr.instances() != m || tr.horizon() != t) {
        return Err(Error::ShapeMismatch(
            "traces disagree on (instances, horizon)".into(),
        ));
    }
    let n = traces.len() as f64;
    let mut mean = vec![vec![0.0f64; t]; m];
    let mut stderr = vec![vec![0.0f64; t]; m];
    for inst in 0..m {
        for round in 0..t {
            let values: Vec<f64> = traces
                .iter()
                .map(|tr| tr.per_instance_cumulative[inst][round])
                .collect();
            let mu = values.iter().sum::<f64>() / n;
            mean[inst][round] = mu;
            if traces.len() > 1 {
                let var =
                    values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0);
                stderr[inst][round] = (var / n).sqrt();
            }
        }
    }
    Ok(RegretSummary { mean, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn tie_break_is_uniform_over_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scores = [0.0, 0.0, 0.0];
        let mut hits = [0usize; 3];
        for _ in 0..6000 {
            hits[argmax_tie_break(&scores, &mut rng)] += 1;
        }
        for h in hits {
            let freq = h as f64 / 6000.0;
            assert!((0.28..0.39).contains(&freq), "freq {freq}");
        }
    }

    #[test]
    fn argmax_without_ties_ignores_the_stream() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let before = rng.clone();
        let contexts = vec![
            DVector::from_column_slice(&[1.0, 0.0]),
            DVector::from_column_slice(&[3.0, 0.0]),
            DVector::from_column_slice(&[2.0, 0.0]),
        ];
        let e1 = DVector::from_column_slice(&[1.0, 0.0]);
        assert_eq!(choose_arm(&contexts, &e1, &mut rng), 1);
        assert_eq!(rng, before);
    }

    #[test]
    fn argmax_invariant_under_positive_scaling() {
        let mut rng1 = ChaCha8Rng::seed_from_u64(3);
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        let contexts: Vec<DVector<f64>> = (0..4)
            .map(|i| DVector::from_fn(3, |j, _| ((i * 3 + j) as f64 * 0.77).sin()))
            .collect();
        let est = DVector::from_column_slice(&[0.2, -0.4, 0.6]);
        let scaled = &est * 17.5;
        assert_eq!(
            choose_arm(&contexts, &est, &mut rng1),
            choose_arm(&contexts, &scaled, &mut rng2)
        );
    }

    #[test]
    fn summary_examples() {
        let mk = |v: f64| RegretTrace {
            per_instance_cumulative: vec![vec![v / 2.0, v]],
            activation_counts: vec![2],
            batch_refit_log: vec![],
            final_buffer_counts: vec![0],
            seed: 0,
        };
        // single trace: stderr identically zero
        let s = regret_summary(&[mk(10.0)]).unwrap();
        assert_eq!(s.stderr[0], vec![0.0, 0.0]);
        // identical traces: mean equals either, stderr zero
        let s = regret_summary(&[mk(10.0), mk(10.0)]).unwrap();
        assert_eq!(s.mean[0][1], 10.0);
        assert_eq!(s.stderr[0][1], 0.0);
        // final regrets 10 and 14: mean 12, stderr 2
        let s = regret_summary(&[mk(10.0), mk(14.0)]).unwrap();
        assert_eq!(s.mean[0][1], 12.0);
        assert_eq!(s.stderr[0][1], 2.0);
    }

    #[test]
    fn summary_shape_mismatch() {
        let a = RegretTrace {
            per_instance_cumulative: vec![vec![0.0; 3]],
            activation_counts: vec![0],
            batch_refit_log: vec![],
            final_buffer_counts: vec![0],
            seed: 0,
        };
        let b = RegretTrace {
            per_instance_cumulative: vec![vec![0.0; 4]],
            activation_counts: vec![0],
            batch_refit_log: vec![],
            final_buffer_counts: vec![0],
            seed: 0,
        };
        assert!(matches!(
            regret_summary(&[a, b]),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
