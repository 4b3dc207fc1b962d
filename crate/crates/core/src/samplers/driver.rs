use rand::Rng;

use super::schedule::{Schedule, ScheduleValues};
use crate::error::{check_dim, Error, Result};
use crate::kernels::{Kernel, KernelFamily};
use crate::policy::{MixturePolicy, ParticleStore, Proposal};
use crate::targets::{ExplorationDensity, Target};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Full kernel-mixture proposal; `O(n)` density cost per draw.
    #[default]
    Midas,
    /// Equal-weight mixture over `ell_n` resampled particles.
    SubMidas,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midas" => Ok(Self::Midas),
            "submidas" => Ok(Self::SubMidas),
            other => Err(Error::Argument(format!("unknown algorithm `{other}`"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Midas => "midas",
            Self::SubMidas => "submidas",
        })
    }
}

/// Everything a single adaptive run needs besides the target, `q0` and the RNG.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub eta: f64,
    /// Total number of target evaluations.
    pub budget: usize,
    /// Points per step after the first.
    pub batch: usize,
    pub schedule: Schedule,
    pub kernel: KernelFamily,
    /// Checkpoint after every this many evaluations; 0 keeps only the final one.
    pub checkpoint_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Midas,
            eta: 1.0,
            budget: 60_000,
            batch: 300,
            schedule: Schedule::default(),
            kernel: KernelFamily::Gaussian,
            checkpoint_every: 6000,
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Argument(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if self.batch == 0 {
            return Err(Error::Argument("batch size must be positive".into()));
        }
        self.schedule.check()?;
        let first = self.schedule.batch_size(1, self.batch);
        if self.budget < first {
            return Err(Error::Argument(format!(
                "budget {} is below the first-step cost {first}",
                self.budget
            )));
        }
        Ok(())
    }

    /// Evaluations spent by a run that takes `steps` full steps.
    pub fn evaluations_after(&self, steps: usize) -> usize {
        (1..=steps).map(|n| self.schedule.batch_size(n, self.batch)).sum()
    }
}

/// What happened during one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: usize,
    pub values: ScheduleValues,
    /// Mixture rate of the proposal that generated this batch.
    pub proposal_lambda: f64,
    /// Subsample size, for SubMIDAS steps after the first.
    pub ell: Option<usize>,
    /// Particle index range in the store.
    pub range: std::ops::Range<usize>,
    pub log_target: Vec<f64>,
    pub log_proposal: Vec<f64>,
}

impl StepRecord {
    /// `log w = log f_u - log q` per particle.
    pub fn log_weights(&self) -> Vec<f64> {
        self.log_target
            .iter()
            .zip(&self.log_proposal)
            .map(|(f, q)| f - q)
            .collect()
    }
}

/// Step-by-step driver for MIDAS and SubMIDAS.
///
/// Step `n` draws its batch from the current policy (the subsampled one for
/// SubMIDAS), weights each point by `f_u / q`, and inserts the batch with
/// `gamma_n` and `b_n`. The first step always samples `q0`.
pub struct AdaptiveSampler<'a, T: Target + ?Sized> {
    config: RunConfig,
    target: &'a T,
    q0: &'a ExplorationDensity,
    store: ParticleStore,
    evaluations: usize,
    buf: Vec<f64>,
}

impl<'a, T: Target + ?Sized> AdaptiveSampler<'a, T> {
    pub fn new(config: RunConfig, target: &'a T, q0: &'a ExplorationDensity) -> Result<Self> {
        config.check()?;
        check_dim(target.dim(), q0.dim())?;
        let kernel = Kernel::new(config.kernel, target.dim())?;
        let store = ParticleStore::new(kernel, config.eta)?;
        Ok(Self { config, target, q0, store, evaluations: 0, buf: Vec::new() })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn store(&self) -> &ParticleStore {
        &self.store
    }

    pub fn into_store(self) -> ParticleStore {
        self.store
    }

    pub fn steps(&self) -> usize {
        self.store.steps()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn next_batch_size(&self) -> usize {
        self.config.schedule.batch_size(self.steps() + 1, self.config.batch)
    }

    /// Whether another full step fits in the budget.
    pub fn can_step(&self) -> bool {
        self.evaluations + self.next_batch_size() <= self.config.budget
    }

    /// Runs one step regardless of the budget.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<StepRecord> {
        let n = self.steps() + 1;
        let d = self.store.dim();
        let m = self.next_batch_size();
        let values = self.config.schedule.values(n, self.config.batch, d)?;
        let proposal_lambda = if self.store.is_empty() { 1.0 } else { values.lambda };
        let policy = MixturePolicy::new(&self.store, self.q0, proposal_lambda)?;

        self.buf.resize(m * d, 0.0);
        let (log_proposal, ell) = match self.config.algorithm {
            Algorithm::SubMidas if !self.store.is_empty() => {
                let ell = self.config.schedule.subsample_size(self.store.len());
                let sub = policy.subsample(ell, rng)?;
                (draw_batch(&sub, rng, &mut self.buf)?, Some(ell))
            }
            _ => (draw_batch(&policy, rng, &mut self.buf)?, None),
        };

        let mut log_target = Vec::with_capacity(m);
        let mut log_w = Vec::with_capacity(m);
        for (x, &lq) in self.buf.chunks_exact(d).zip(&log_proposal) {
            let lf = self.target.log_density(x);
            let lw = lf - lq;
            if lw.is_nan() || lw == f64::INFINITY {
                return Err(Error::Internal(format!(
                    "non-finite importance weight at step {n}: log f = {lf}, log q = {lq}"
                )));
            }
            log_target.push(lf);
            log_w.push(lw);
        }
        self.evaluations += m;

        let start = self.store.len();
        self.store.insert_batch(&self.buf, &log_w, values.gamma, values.bandwidth)?;
        Ok(StepRecord {
            step: n,
            values,
            proposal_lambda,
            ell,
            range: start..self.store.len(),
            log_target,
            log_proposal,
        })
    }
}

fn draw_batch<P: Proposal, R: Rng + ?Sized>(proposal: &P, rng: &mut R, buf: &mut [f64]) -> Result<Vec<f64>> {
    let d = proposal.dim();
    for row in buf.chunks_exact_mut(d) {
        proposal.sample_into(rng, row)?;
    }
    Ok(buf.chunks_exact(d).map(|x| proposal.log_density(x)).collect())
}

/// Position of a run when a checkpoint fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    pub evaluations: usize,
    pub step: usize,
    pub is_final: bool,
}

/// Runs `config.algorithm` until no further full step fits in the budget.
///
/// `on_checkpoint` fires after the first step at which the evaluation count
/// reaches each multiple of `checkpoint_every`, and once more at the end
/// (with `is_final` set) unless the last checkpoint already covered it.
pub fn run_adaptive<T, R, F>(
    config: &RunConfig,
    target: &T,
    q0: &ExplorationDensity,
    rng: &mut R,
    mut on_checkpoint: F,
) -> Result<ParticleStore>
where
    T: Target + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(&Checkpoint, &ParticleStore) -> Result<()>,
{
    let mut sampler = AdaptiveSampler::new(config.clone(), target, q0)?;
    let every = config.checkpoint_every;
    let mut next_mark = every;
    let mut last_reported = None;
    while sampler.can_step() {
        sampler.step(rng)?;
        if every > 0 && sampler.evaluations() >= next_mark {
            let is_final = !sampler.can_step();
            on_checkpoint(
                &Checkpoint { evaluations: sampler.evaluations(), step: sampler.steps(), is_final },
                sampler.store(),
            )?;
            last_reported = Some(sampler.evaluations());
            while next_mark <= sampler.evaluations() {
                next_mark += every;
            }
        }
    }
    if last_reported != Some(sampler.evaluations()) {
        on_checkpoint(
            &Checkpoint { evaluations: sampler.evaluations(), step: sampler.steps(), is_final: true },
            sampler.store(),
        )?;
    }
    Ok(sampler.into_store())
}

/// MIDAS with the full mixture proposal.
pub fn midas_run<T, R, F>(
    config: &RunConfig,
    target: &T,
    q0: &ExplorationDensity,
    rng: &mut R,
    on_checkpoint: F,
) -> Result<ParticleStore>
where
    T: Target + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(&Checkpoint, &ParticleStore) -> Result<()>,
{
    let config = RunConfig { algorithm: Algorithm::Midas, ..config.clone() };
    run_adaptive(&config, target, q0, rng, on_checkpoint)
}

/// SubMIDAS: each step samples and weights with the subsampled proposal.
pub fn submidas_run<T, R, F>(
    config: &RunConfig,
    target: &T,
    q0: &ExplorationDensity,
    rng: &mut R,
    on_checkpoint: F,
) -> Result<ParticleStore>
where
    T: Target + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(&Checkpoint, &ParticleStore) -> Result<()>,
{
    let config = RunConfig { algorithm: Algorithm::SubMidas, ..config.clone() };
    run_adaptive(&config, target, q0, rng, on_checkpoint)
}
