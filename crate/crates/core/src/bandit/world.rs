//! Ground-truth description of a bandit simulation.

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BanditModel {
    /// Per-arm contexts, one shared parameter per instance.
    ModelC,
    /// One shared context, per-arm parameters per instance.
    ModelP,
}

/// Context distribution: centered Gaussian with covariance `scale * I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContextSpec {
    StandardGaussian,
    ScaledGaussian { scale: f64 },
}

impl ContextSpec {
    pub fn std_dev(&self) -> f64 {
        match self {
            ContextSpec::StandardGaussian => 1.0,
            ContextSpec::ScaledGaussian { scale } => scale.sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum WorldParams {
    /// Model-C: one parameter vector per instance.
    Shared(Vec<DVector<f64>>),
    /// Model-P: per-instance, per-arm parameter vectors.
    PerArm(Vec<Vec<DVector<f64>>>),
}

#[derive(Debug, Clone)]
pub struct BanditWorld {
    pub model: BanditModel,
    pub dim: usize,
    pub arms: usize,
    pub instances: usize,
    pub horizon: usize,
    pub true_params: WorldParams,
    pub activation_probs: Vec<f64>,
    pub context_spec: ContextSpec,
    pub noise_scale: f64,
}

impl BanditWorld {
    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 || self.arms == 0 || self.dim == 0 || self.horizon == 0 {
            return Err(Error::InvalidParameter(
                "world needs instances, arms, dim, horizon >= 1".into(),
            ));
        }
        if self.activation_probs.len() != self.instances {
            return Err(Error::ShapeMismatch(format!(
                "{} activation probabilities for {} instances",
                self.activation_probs.len(),
                self.instances
            )));
        }
        if self
            .activation_probs
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidParameter(
                "activation probabilities must lie in [0, 1]".into(),
            ));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::InvalidParameter("noise scale must be >= 0".into()));
        }
        let check_norm = |v: &DVector<f64>| -> Result<()> {
            if v.len() != self.dim {
                return Err(Error::ShapeMismatch(format!(
                    "parameter of length {} in a d = {} world",
                    v.len(),
                    self.dim
                )));
            }
            if v.norm() > 1.0 + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "parameter norm {} exceeds 1",
                    v.norm()
                )));
            }
            Ok(())
        };
        match (&self.model, &self.true_params) {
            (BanditModel::ModelC, WorldParams::Shared(betas)) => {
                if betas.len() != self.instances {
                    return Err(Error::ShapeMismatch("one parameter per instance".into()));
                }
                betas.iter().try_for_each(check_norm)?;
            }
            (BanditModel::ModelP, WorldParams::PerArm(betas)) => {
                if betas.len() != self.instances
                    || betas.iter().any(|arms| arms.len() != self.arms)
                {
                    return Err(Error::ShapeMismatch(
                        "one parameter per instance and arm".into(),
                    ));
                }
                betas.iter().flatten().try_for_each(check_norm)?;
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "parameter layout does not match the model".into(),
                ))
            }
        }
        Ok(())
    }
}
