//! Flat JSON experiment configuration with command-line overrides.

use std::path::{Path, PathBuf};

use midas_core::kernels::KernelFamily;
use midas_core::samplers::{Algorithm, RunConfig, Schedule};
use midas_core::WeightKind;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// A user-facing configuration problem (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Fully resolved experiment description; every key has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// coldstart, mixture, anisotropic, fourmodes, bayeslogistic or custom.
    pub experiment: String,
    /// Toy target name for `custom`.
    pub target: Option<String>,
    pub dim: usize,
    pub etas: Vec<f64>,
    /// Number of runs per (algorithm, eta).
    pub seeds: usize,
    /// Base seed of the stream family.
    pub seed: u64,
    pub algorithms: Vec<String>,
    pub budget: usize,
    pub batch: usize,
    pub checkpoint_every: usize,
    pub kernel: String,

    pub gamma_scale: f64,
    pub gamma_offset: f64,
    pub gamma_exponent: f64,
    pub bandwidth_scale: f64,
    pub bandwidth_reference: f64,
    pub bandwidth_exponent: Option<f64>,
    pub lambda_scale: f64,
    pub lambda_offset: f64,
    pub subsample_exponent: f64,
    pub burnin_batch: usize,
    pub burnin_lambda: f64,
    pub burnin_steps: usize,

    pub n_proj: usize,
    pub reference_size: usize,
    /// raw or effective.
    pub weights: String,

    /// gaussian or student; defaults follow the experiment.
    pub q0_family: Option<String>,
    pub q0_scale: Option<f64>,
    pub q0_dof: f64,

    pub ais_levels: Vec<usize>,
    pub ais_batch: usize,
    pub ais_n_mh: usize,
    pub ais_beta_min: f64,
    pub ais_proposal_scale: Option<f64>,

    pub data: Option<PathBuf>,
    pub header: bool,
    pub train_size: usize,
    pub split_seed: u64,
    pub prior_a: f64,
    pub prior_b: f64,

    pub dump_particles: bool,
    pub out: PathBuf,
    pub strict: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let s = Schedule::default();
        Self {
            experiment: "coldstart".into(),
            target: None,
            dim: 2,
            etas: vec![1.0],
            seeds: 1,
            seed: 0,
            algorithms: vec!["midas".into()],
            budget: 60_000,
            batch: 300,
            checkpoint_every: 6000,
            kernel: "gaussian".into(),
            gamma_scale: s.gamma_scale,
            gamma_offset: s.gamma_offset,
            gamma_exponent: s.gamma_exponent,
            bandwidth_scale: s.bandwidth_scale,
            bandwidth_reference: s.bandwidth_reference,
            bandwidth_exponent: s.bandwidth_exponent,
            lambda_scale: s.lambda_scale,
            lambda_offset: s.lambda_offset,
            subsample_exponent: s.subsample_exponent,
            burnin_batch: s.burnin_batch,
            burnin_lambda: s.burnin_lambda,
            burnin_steps: s.burnin_steps,
            n_proj: midas_core::metrics::DEFAULT_PROJECTIONS,
            reference_size: 10_000,
            weights: "raw".into(),
            q0_family: None,
            q0_scale: None,
            q0_dof: midas_core::targets::DEFAULT_STUDENT_DOF,
            ais_levels: vec![5, 10, 30],
            ais_batch: 300,
            ais_n_mh: 20,
            ais_beta_min: 1e-4,
            ais_proposal_scale: None,
            data: None,
            header: false,
            train_size: 400,
            split_seed: 0,
            prior_a: 1.0,
            prior_b: 0.01,
            dump_particles: false,
            out: PathBuf::from("midas-out"),
            strict: false,
        }
    }
}

/// Algorithms a spec may request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgoChoice {
    Adaptive(Algorithm),
    Ais,
}

pub const EXPERIMENTS: [&str; 6] =
    ["coldstart", "mixture", "anisotropic", "fourmodes", "bayeslogistic", "custom"];

impl ExperimentSpec {
    pub fn is_logistic(&self) -> bool {
        self.experiment == "bayeslogistic"
    }

    /// Toy target name, for every experiment but `bayeslogistic`.
    pub fn toy_name(&self) -> Option<&str> {
        match self.experiment.as_str() {
            "bayeslogistic" => None,
            "custom" => self.target.as_deref(),
            other => Some(other),
        }
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            gamma_scale: self.gamma_scale,
            gamma_offset: self.gamma_offset,
            gamma_exponent: self.gamma_exponent,
            bandwidth_scale: self.bandwidth_scale,
            bandwidth_reference: self.bandwidth_reference,
            bandwidth_exponent: self.bandwidth_exponent,
            lambda_scale: self.lambda_scale,
            lambda_offset: self.lambda_offset,
            subsample_exponent: self.subsample_exponent,
            burnin_batch: self.burnin_batch,
            burnin_lambda: self.burnin_lambda,
            burnin_steps: self.burnin_steps,
        }
    }

    pub fn kernel_family(&self) -> anyhow::Result<KernelFamily> {
        self.kernel.parse().map_err(|e| config_err(format!("kernel: {e}")))
    }

    pub fn weight_kind(&self) -> anyhow::Result<WeightKind> {
        self.weights.parse().map_err(|e| config_err(format!("weights: {e}")))
    }

    pub fn algorithm_choices(&self) -> anyhow::Result<Vec<AlgoChoice>> {
        self.algorithms
            .iter()
            .map(|a| match a.as_str() {
                "ais" => Ok(AlgoChoice::Ais),
                other => other
                    .parse()
                    .map(AlgoChoice::Adaptive)
                    .map_err(|_| config_err(format!("algorithms: unknown algorithm `{other}` (midas, submidas, ais)"))),
            })
            .collect()
    }

    pub fn run_config(&self, algorithm: Algorithm, eta: f64) -> anyhow::Result<RunConfig> {
        Ok(RunConfig {
            algorithm,
            eta,
            budget: self.budget,
            batch: self.batch,
            schedule: self.schedule(),
            kernel: self.kernel_family()?,
            checkpoint_every: self.checkpoint_every,
        })
    }

    /// Checks every field that can be checked without touching the filesystem.
    pub fn validate(&self) -> anyhow::Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(config_err(format!(
                "experiment: unknown experiment `{}` (expected one of {})",
                self.experiment,
                EXPERIMENTS.join(", ")
            )));
        }
        if self.experiment == "custom" && self.target.is_none() {
            return Err(config_err("target: required for the custom experiment"));
        }
        if self.is_logistic() && self.data.is_none() {
            return Err(config_err("data: required for bayeslogistic (see `midas make-waveform`)"));
        }
        if self.dim == 0 {
            return Err(config_err("dim: must be positive"));
        }
        if self.etas.is_empty() {
            return Err(config_err("etas: at least one learning rate is required"));
        }
        if let Some(eta) = self.etas.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(config_err(format!("eta: {eta} is outside (0, 1]")));
        }
        if self.seeds == 0 {
            return Err(config_err("seeds: at least one seed is required"));
        }
        if self.algorithms.is_empty() {
            return Err(config_err("algorithms: at least one algorithm is required"));
        }
        let algos = self.algorithm_choices()?;
        if self.is_logistic() && algos.contains(&AlgoChoice::Ais) {
            return Err(config_err("algorithms: ais is only available for toy targets"));
        }
        self.kernel_family()?;
        self.weight_kind()?;
        if self.batch == 0 {
            return Err(config_err("batch: must be positive"));
        }
        self.schedule().check().map_err(|e| config_err(format!("schedule: {e}")))?;
        let first = self.schedule().batch_size(1, self.batch);
        if self.budget < first {
            return Err(config_err(format!("budget: {} is below the first-step cost {first}", self.budget)));
        }
        if self.n_proj == 0 || self.reference_size == 0 {
            return Err(config_err("n_proj and reference_size must be positive"));
        }
        if let Some(f) = &self.q0_family {
            if f != "gaussian" && f != "student" {
                return Err(config_err(format!("q0_family: `{f}` (expected gaussian or student)")));
            }
        }
        if let Some(s) = self.q0_scale {
            if !(s > 0.0) {
                return Err(config_err("q0_scale: must be positive"));
            }
        }
        if !(self.q0_dof > 0.0) {
            return Err(config_err("q0_dof: must be positive"));
        }
        if algos.contains(&AlgoChoice::Ais) {
            if self.ais_levels.is_empty() || self.ais_levels.contains(&0) {
                return Err(config_err("ais_levels: need positive level counts"));
            }
            if self.ais_batch == 0 {
                return Err(config_err("ais_batch: must be positive"));
            }
            if !(self.ais_beta_min > 0.0 && self.ais_beta_min < 1.0) {
                return Err(config_err("ais_beta_min: must lie in (0, 1)"));
            }
        }
        if !(self.prior_a > 0.0 && self.prior_b > 0.0) {
            return Err(config_err("prior_a and prior_b must be positive"));
        }
        if self.is_logistic() && self.train_size == 0 {
            return Err(config_err("train_size: must be positive"));
        }
        Ok(())
    }
}

/// Names of all configuration keys, in declaration order.
pub fn valid_keys() -> Vec<String> {
    match serde_json::to_value(ExperimentSpec::default()) {
        Ok(Value::Object(map)) => map.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

/// Reads a flat JSON object from `path`.
pub fn read_config_file(path: &Path) -> anyhow::Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::Error::new(e).context(format!("reading {}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(config_err(format!("{}: expected a JSON object", path.display()))),
        Err(e) => Err(config_err(format!("{}: {e}", path.display()))),
    }
}

/// Parses `KEY=VALUE`; the value is read as JSON when possible, else as a string.
pub fn parse_assignment(s: &str) -> anyhow::Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| config_err(format!("`{s}`: expected KEY=VALUE")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

/// Merges `overrides` over `base` and resolves the result into a spec.
pub fn resolve(
    mut base: Map<String, Value>,
    overrides: impl IntoIterator<Item = (String, Value)>,
) -> anyhow::Result<ExperimentSpec> {
    for (k, v) in overrides {
        base.insert(k, v);
    }
    let keys = valid_keys();
    if let Some(bad) = base.keys().find(|k| !keys.contains(k)) {
        return Err(config_err(format!(
            "unknown key `{bad}`; valid keys: {}",
            keys.join(", ")
        )));
    }
    let spec: ExperimentSpec = serde_json::from_value(Value::Object(base))
        .map_err(|e| config_err(e.to_string()))?;
    if spec.experiment == "fourmodes" && spec.dim != 2 {
        let mut spec = spec;
        spec.dim = 2;
        spec.validate()?;
        return Ok(spec);
    }
    spec.validate()?;
    Ok(spec)
}
