//! Synthetic regression tasks and bandit worlds with exact sparse
//! heterogeneity: every task parameter equals a shared unit vector with at
//! most s coordinates resampled, renormalized only over the resampled
//! coordinates so the untouched ones stay bit-identical.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bandit::{BanditModel, BanditWorld, ContextSpec, WorldParams};
use crate::error::{Error, Result};
use crate::task::TaskDataset;

/// Noise distribution for regression responses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseFamily {
    Gaussian { sigma: f64 },
    /// Uniform on `[-bound, bound]`.
    Bounded { bound: f64 },
    /// Difference of two independent exponentials with the given rate
    /// (symmetric, sub-exponential tails).
    SubExponential { rate: f64 },
}

impl NoiseFamily {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            NoiseFamily::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            NoiseFamily::Bounded { bound } => rng.random_range(-bound..=bound),
            NoiseFamily::SubExponential { rate } => {
                let e1 = -(1.0 - rng.random::<f64>()).ln() / rate;
                let e2 = -(1.0 - rng.random::<f64>()).ln() / rate;
                e1 - e2
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSizes {
    Shared(usize),
    PerTask(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct SynthRegressionSpec {
    pub dim: usize,
    pub tasks: usize,
    pub sparsity: usize,
    pub sizes: TaskSizes,
    pub noise: NoiseFamily,
    pub covariance: ContextSpec,
    pub seed: u64,
}

impl SynthRegressionSpec {
    /// Balanced Gaussian-noise spec.
    pub fn balanced(dim: usize, tasks: usize, sparsity: usize, n: usize, sigma: f64, seed: u64) -> Self {
        Self {
            dim,
            tasks,
            sparsity,
            sizes: TaskSizes::Shared(n),
            noise: NoiseFamily::Gaussian { sigma },
            covariance: ContextSpec::StandardGaussian,
            seed,
        }
    }

    fn size_of(&self, m: usize) -> usize {
        match &self.sizes {
            TaskSizes::Shared(n) => *n,
            TaskSizes::PerTask(v) => v[m],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.tasks == 0 {
            return Err(Error::InvalidParameter("need dim >= 1 and tasks >= 1".into()));
        }
        if self.sparsity > self.dim {
            return Err(Error::InvalidParameter(format!(
                "sparsity {} exceeds dimension {}",
                self.sparsity, self.dim
            )));
        }
        match &self.sizes {
            TaskSizes::Shared(n) if *n >= 1 => Ok(()),
            TaskSizes::PerTask(v) if v.len() == self.tasks && v.iter().all(|&n| n >= 1) => Ok(()),
            _ => Err(Error::InvalidParameter(
                "per-task sizes must match the task count and be >= 1".into(),
            )),
        }
    }
}

/// Uniform draw from the unit sphere: a normalized standard Gaussian vector.
pub fn sample_sphere(d: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::<f64>::from_fn(d, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}

/// Resamples s uniformly chosen coordinates of a unit vector with fresh
/// Gaussian draws, then rescales only those coordinates so the result is
/// again a unit vector. Untouched coordinates are returned bit-for-bit.
pub fn perturb_sparse(base: &DVector<f64>, s: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let d = base.len();
    assert!(s <= d, "sparsity {s} exceeds dimension {d}");
    if s == 0 {
        return base.clone();
    }
    let chosen = rand::seq::index::sample(rng, d, s).into_vec();
    let untouched_mass: f64 = {
        let replaced: f64 = chosen.iter().map(|&k| base[k] * base[k]).sum();
        (base.norm_squared() - replaced).max(0.0)
    };
    let target = (1.0 - untouched_mass).max(0.0);

    let mut out = base.clone();
    for _ in 0..100 {
        let draws: Vec<f64> = (0..s).map(|_| StandardNormal.sample(rng)).collect();
        let mass: f64 = draws.iter().map(|g| g * g).sum();
        if mass > 0.0 {
            let scale = (target / mass).sqrt();
            for (i, &k) in chosen.iter().enumerate() {
                out[k] = draws[i] * scale;
            }
            return out;
        }
    }
    // unreachable in practice: spread the target mass evenly instead
    let fill = (target / s as f64).sqrt();
    for &k in &chosen {
        out[k] = fill;
    }
    out
}

#[derive(Debug, Clone)]
pub struct RegressionTruth {
    pub global: DVector<f64>,
    pub per_task: Vec<DVector<f64>>,
}

/// Draws features from the configured Gaussian, responses as linear signal
/// plus noise, and returns the ground truth alongside the datasets.
pub fn gen_regression_tasks(
    spec: &SynthRegressionSpec,
) -> Result<(Vec<TaskDataset>, RegressionTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let global = sample_sphere(spec.dim, &mut rng);
    let per_task: Vec<DVector<f64>> = (0..spec.tasks)
        .map(|_| perturb_sparse(&global, spec.sparsity, &mut rng))
        .collect();

    let sd = spec.covariance.std_dev();
    let mut tasks = Vec::with_capacity(spec.tasks);
    for (m, beta) in per_task.iter().enumerate() {
        let n = spec.size_of(m);
        let x = DMatrix::<f64>::from_fn(n, spec.dim, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        });
        let mut y = &x * beta;
        for v in y.iter_mut() {
            *v += spec.noise.sample(&mut rng);
        }
        tasks.push(TaskDataset {
            task_id: m,
            features: x,
            responses: y,
        });
    }
    Ok((tasks, RegressionTruth { global, per_task }))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActivationSpec {
    /// Independent uniform draws on [0, 1].
    Uniform,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct BanditWorldSpec {
    pub model: BanditModel,
    pub dim: usize,
    pub arms: usize,
    pub instances: usize,
    pub horizon: usize,
    pub sparsity: usize,
    pub activation: ActivationSpec,
    pub context: ContextSpec,
    pub noise_scale: f64,
    pub seed: u64,
}

/// Samples world parameters on the unit sphere with sparse heterogeneity.
/// Model-C draws one global center; Model-P draws one center per arm.
pub fn gen_bandit_world(spec: &BanditWorldSpec) -> Result<BanditWorld> {
    if spec.sparsity > spec.dim {
        return Err(Error::InvalidParameter(format!(
            "sparsity {} exceeds dimension {}",
            spec.sparsity, spec.dim
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let true_params = match spec.model {
        BanditModel::ModelC => {
            let center = sample_sphere(spec.dim, &mut rng);
            WorldParams::Shared(
                (0..spec.instances)
                    .map(|_| perturb_sparse(&center, spec.sparsity, &mut rng))
                    .collect(),
            )
        }
        BanditModel::ModelP => {
            let centers: Vec<DVector<f64>> = (0..spec.arms)
                .map(|_| sample_sphere(spec.dim, &mut rng))
                .collect();
            WorldParams::PerArm(
                (0..spec.instances)
                    .map(|_| {
                        centers
                            .iter()
                            .map(|c| perturb_sparse(c, spec.sparsity, &mut rng))
                            .collect()
                    })
                    .collect(),
            )
        }
    };
    let activation_probs = match &spec.activation {
        ActivationSpec::Uniform => (0..spec.instances).map(|_| rng.random::<f64>()).collect(),
        ActivationSpec::Fixed(p) => p.clone(),
    };
    let world = BanditWorld {
        model: spec.model,
        dim: spec.dim,
        arms: spec.arms,
        instances: spec.instances,
        horizon: spec.horizon,
        true_params,
        activation_probs,
        context_spec: spec.context,
        noise_scale: spec.noise_scale,
    };
    world.validate()?;
    Ok(world)
}
