//! Experiment configuration: JSON with a strict schema. Unknown keys are
//! hard errors so a typo cannot silently change an experiment.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Regress,
    Bandit,
    Recover,
    Ingest,
    Tune,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Kind::Regress => "regress",
            Kind::Bandit => "bandit",
            Kind::Recover => "recover",
            Kind::Ingest => "ingest",
            Kind::Tune => "tune",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    #[serde(default)]
    pub d: Vec<usize>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub m: Vec<usize>,
    #[serde(default)]
    pub s: Vec<usize>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    /// Bandit horizon T.
    #[serde(default)]
    pub t: Vec<usize>,
    /// Initial batch size H0.
    #[serde(default)]
    pub h0: Vec<usize>,
    /// Number of arms K.
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub p_mode: Vec<PMode>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PMode {
    Uniform,
    Fixed { probs: Vec<f64> },
    /// `count` probabilities evenly spaced between `lo` and `hi`.
    Linspace { lo: f64, hi: f64 },
}

/// One fully instantiated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub sigma: f64,
    pub t: usize,
    pub h0: usize,
    pub k: usize,
    pub p_mode: PMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionName {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleName {
    SqrtLog,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    Known,
    Estimate,
}

fn default_sigma_mode() -> SigmaMode {
    SigmaMode::Known
}

fn default_option() -> OptionName {
    OptionName::Hard
}

fn default_schedule() -> ScheduleName {
    ScheduleName::SqrtLog
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Ols,
    Lasso {
        c_lambda: f64,
    },
    Pooled,
    RobustMultitask {
        c_lambda: f64,
        #[serde(default)]
        trim_fraction: Option<f64>,
        #[serde(default)]
        use_sparsity_hint: bool,
    },
    Molar {
        c_gamma: f64,
        #[serde(default = "default_option")]
        option: OptionName,
        #[serde(default = "default_schedule")]
        schedule: ScheduleName,
        #[serde(default = "default_sigma_mode")]
        sigma_mode: SigmaMode,
    },
    Olsb,
    Lassob {
        c_lambda: f64,
    },
    Rmb {
        c_lambda: f64,
        #[serde(default)]
        trim_fraction: Option<f64>,
    },
    Molarb {
        c_gamma: f64,
        #[serde(default = "default_option")]
        option: OptionName,
        #[serde(default = "default_schedule")]
        schedule: ScheduleName,
    },
    Oracle,
}

impl MethodSpec {
    pub fn id(&self) -> &'static str {
        match self {
            MethodSpec::Ols => "ols",
            MethodSpec::Lasso { .. } => "lasso",
            MethodSpec::Pooled => "pooled",
            MethodSpec::RobustMultitask { .. } => "rm",
            MethodSpec::Molar { .. } => "molar",
            MethodSpec::Olsb => "olsb",
            MethodSpec::Lassob { .. } => "lassob",
            MethodSpec::Rmb { .. } => "rmb",
            MethodSpec::Molarb { .. } => "molarb",
            MethodSpec::Oracle => "oracle",
        }
    }

    pub fn is_bandit_policy(&self) -> bool {
        matches!(
            self,
            MethodSpec::Olsb
                | MethodSpec::Lassob { .. }
                | MethodSpec::Rmb { .. }
                | MethodSpec::Molarb { .. }
                | MethodSpec::Oracle
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Base { base: u64, count: u64 },
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::Base { base: 0, count: 1 }
    }
}

impl SeedSpec {
    pub fn expand(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Base { base, count } => (0..*count).map(|i| base + i).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EligibilitySection {
    #[serde(default = "default_elig_mode")]
    pub mode: EligibilityModeName,
    #[serde(default = "default_factor")]
    pub factor: f64,
    #[serde(default = "default_cb")]
    pub c_b: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EligibilityModeName {
    TheoryForm,
    DimensionMultiple,
}

fn default_elig_mode() -> EligibilityModeName {
    EligibilityModeName::DimensionMultiple
}
fn default_factor() -> f64 {
    2.0
}
fn default_cb() -> f64 {
    1.0
}

impl Default for EligibilitySection {
    fn default() -> Self {
        Self {
            mode: default_elig_mode(),
            factor: default_factor(),
            c_b: default_cb(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverSection {
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_max_iter")]
    pub max_iterations: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_relax")]
    pub relaxation: f64,
}

fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    50_000
}
fn default_step() -> f64 {
    1.0
}
fn default_relax() -> f64 {
    1.5
}

impl Default for RecoverSection {
    fn default() -> Self {
        Self {
            tolerance: default_tol(),
            max_iterations: default_max_iter(),
            step: default_step(),
            relaxation: default_relax(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSection {
    pub input: PathBuf,
    pub task_column: String,
    pub response_column: String,
    #[serde(default = "default_cutoff")]
    pub correlation_cutoff: f64,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_fractions")]
    pub fractions: (f64, f64, f64),
    #[serde(default)]
    pub standardize: bool,
}

fn default_cutoff() -> f64 {
    0.6
}
fn default_folds() -> usize {
    10
}
fn default_fractions() -> (f64, f64, f64) {
    (0.9, 0.05, 0.05)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneSection {
    /// Method whose numerical coefficient is swept.
    pub target: MethodSpec,
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
}

fn default_grid() -> Vec<f64> {
    vec![0.05, 0.35, 0.7, 1.0, 2.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub scenario: ScenarioGrid,
    #[serde(default)]
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub seeds: SeedSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub eligibility: EligibilitySection,
    #[serde(default)]
    pub recover: RecoverSection,
    #[serde(default)]
    pub ingest: Option<IngestSection>,
    #[serde(default)]
    pub tune: Option<TuneSection>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            CliError::Config(format!(
                "config error at `{}`: {}",
                e.path(),
                e.inner()
            ))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        let seeds = self.seeds.expand();
        if seeds.is_empty() {
            return Err(CliError::Config("seeds must be non-empty".into()));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(CliError::Config("seeds must be distinct".into()));
        }
        let grid_kinds_ok = match self.kind {
            Kind::Regress | Kind::Tune => {
                !self.scenario.d.is_empty()
                    && !self.scenario.n.is_empty()
                    && !self.scenario.m.is_empty()
                    && !self.scenario.s.is_empty()
                    && !self.scenario.sigma.is_empty()
            }
            Kind::Bandit => {
                !self.scenario.d.is_empty()
                    && !self.scenario.m.is_empty()
                    && !self.scenario.s.is_empty()
                    && !self.scenario.sigma.is_empty()
                    && !self.scenario.t.is_empty()
                    && !self.scenario.h0.is_empty()
                    && !self.scenario.k.is_empty()
            }
            Kind::Recover => {
                !self.scenario.d.is_empty()
                    && !self.scenario.n.is_empty()
                    && !self.scenario.m.is_empty()
                    && !self.scenario.s.is_empty()
            }
            Kind::Ingest => true,
        };
        if !grid_kinds_ok {
            return Err(CliError::Config(format!(
                "scenario grid is missing required lists for kind `{}`",
                self.kind
            )));
        }
        match self.kind {
            Kind::Regress => {
                if self.methods.is_empty() {
                    return Err(CliError::Config("regress needs at least one method".into()));
                }
                if let Some(m) = self.methods.iter().find(|m| m.is_bandit_policy()) {
                    return Err(CliError::Config(format!(
                        "method `{}` is a bandit policy; kind is regress",
                        m.id()
                    )));
                }
            }
            Kind::Bandit => {
                if self.methods.is_empty() {
                    return Err(CliError::Config("bandit needs at least one policy".into()));
                }
                if let Some(m) = self.methods.iter().find(|m| !m.is_bandit_policy()) {
                    return Err(CliError::Config(format!(
                        "method `{}` is not a bandit policy",
                        m.id()
                    )));
                }
            }
            Kind::Ingest => {
                if self.ingest.is_none() {
                    return Err(CliError::Config("ingest config section missing".into()));
                }
            }
            Kind::Tune => {
                if self.tune.is_none() {
                    return Err(CliError::Config("tune config section missing".into()));
                }
                if let Some(t) = &self.tune {
                    if t.grid.is_empty() {
                        return Err(CliError::Config("tune grid must be non-empty".into()));
                    }
                    if t.target.is_bandit_policy() {
                        return Err(CliError::Config(
                            "tune targets offline estimators only".into(),
                        ));
                    }
                }
            }
            Kind::Recover => {}
        }
        for p in &self.scenario.p_mode {
            if let PMode::Fixed { probs } = p {
                if probs.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(CliError::Config(
                        "fixed activation probabilities must lie in [0, 1]".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Cartesian product of the scenario lists, in a deterministic order.
    pub fn scenarios(&self) -> Vec<Scenario> {
        let one = |v: &Vec<usize>| -> Vec<usize> {
            if v.is_empty() {
                vec![0]
            } else {
                v.clone()
            }
        };
        let sigmas = if self.scenario.sigma.is_empty() {
            vec![0.0]
        } else {
            self.scenario.sigma.clone()
        };
        let pmodes = if self.scenario.p_mode.is_empty() {
            vec![PMode::Uniform]
        } else {
            self.scenario.p_mode.clone()
        };
        let mut out = Vec::new();
        for &d in &one(&self.scenario.d) {
            for &n in &one(&self.scenario.n) {
                for &m in &one(&self.scenario.m) {
                    for &s in &one(&self.scenario.s) {
                        for &sigma in &sigmas {
                            for &t in &one(&self.scenario.t) {
                                for &h0 in &one(&self.scenario.h0) {
                                    for &k in &one(&self.scenario.k) {
                                        for p_mode in &pmodes {
                                            out.push(Scenario {
                                                d,
                                                n,
                                                m,
                                                s,
                                                sigma,
                                                t,
                                                h0,
                                                k,
                                                p_mode: p_mode.clone(),
                                            });
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Stable hash of the parsed configuration, stamped into every row.
    /// Runtime-only knobs (worker count, output directory) do not identify
    /// the experiment and are excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = None;
        canonical.output_dir = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        format!("{:016x}", crate::seeds::fnv1a(text.as_bytes()))
    }
}
