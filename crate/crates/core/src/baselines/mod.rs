//! Annealed importance sampling with random-walk Metropolis moves.

use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::metrics::WeightedSampleSet;
use crate::targets::{ExplorationDensity, Target};

#[derive(Clone, Debug, PartialEq)]
pub struct AisConfig {
    /// Number of intermediate distributions `K`.
    pub levels: usize,
    pub batch: usize,
    /// Metropolis updates per level.
    pub n_mh: usize,
    pub beta_min: f64,
    /// Random-walk step; `None` means `0.5 / sqrt(d)`.
    pub proposal_scale: Option<f64>,
}

impl Default for AisConfig {
    fn default() -> Self {
        Self { levels: 10, batch: 300, n_mh: 20, beta_min: 1e-4, proposal_scale: None }
    }
}

impl AisConfig {
    pub fn check(&self) -> Result<()> {
        if self.levels == 0 || self.batch == 0 {
            return Err(Error::Argument("levels and batch must be positive".into()));
        }
        if !(self.beta_min > 0.0 && self.beta_min < 1.0) {
            return Err(Error::Argument(format!("beta_min must lie in (0, 1), got {}", self.beta_min)));
        }
        if let Some(s) = self.proposal_scale {
            if !(s > 0.0) {
                return Err(Error::Argument(format!("proposal scale must be positive, got {s}")));
            }
        }
        Ok(())
    }

    pub fn scale_for(&self, d: usize) -> f64 {
        self.proposal_scale.unwrap_or(0.5 / (d as f64).sqrt())
    }

    /// Target evaluations actually performed: one per weight update and one per proposal.
    pub fn evaluations(&self) -> usize {
        self.batch * self.levels * (self.n_mh + 1)
    }

    /// The conventional `K x batch x n_mh` count, which leaves out weight updates.
    pub fn nominal_evaluations(&self) -> usize {
        self.batch * self.levels * self.n_mh
    }
}

/// `beta_k = beta_min^(1 - k/K)` for `k = 0..=K`.
pub fn geometric_schedule(levels: usize, beta_min: f64) -> Result<Vec<f64>> {
    if levels == 0 {
        return Err(Error::Argument("need at least one level".into()));
    }
    if !(beta_min > 0.0 && beta_min < 1.0) {
        return Err(Error::Argument(format!("beta_min must lie in (0, 1), got {beta_min}")));
    }
    let k = levels as f64;
    let mut betas: Vec<f64> = (0..=levels).map(|i| beta_min.powf(1.0 - i as f64 / k)).collect();
    betas[levels] = 1.0;
    Ok(betas)
}

/// One random-walk Metropolis update of `x` in place.
///
/// Draws the Gaussian proposal, then always one uniform, and accepts with
/// probability `min(1, exp(log_density(x') - log_density(x)))`. `log_px` holds
/// the current log-density and is updated on acceptance.
pub fn rw_metropolis_step<F, R>(
    log_density: F,
    x: &mut [f64],
    log_px: &mut f64,
    scale: f64,
    rng: &mut R,
) -> bool
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let proposal: Vec<f64> = x
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(rng);
            v + scale * z
        })
        .collect();
    let u: f64 = rng.random();
    let lp = log_density(&proposal);
    let delta = lp - *log_px;
    // an improper current state (-inf) moves to any finite proposal
    let accept = lp > f64::NEG_INFINITY && (delta >= 0.0 || u < delta.exp());
    if accept {
        x.copy_from_slice(&proposal);
        *log_px = lp;
    }
    accept
}

#[derive(Clone, Debug)]
pub struct AisOutput {
    pub samples: WeightedSampleSet,
    pub log_weights: Vec<f64>,
    pub betas: Vec<f64>,
    /// Acceptance rate of the Metropolis moves at each level `1..=K`.
    pub acceptance_rates: Vec<f64>,
    pub evaluations: usize,
    pub nominal_evaluations: usize,
}

/// Annealed importance sampling from `q0` to `f_u` along the geometric bridge
/// `f_k ∝ q0^(1 - beta_k) f_u^beta_k`.
pub fn ais_run<T, R>(config: &AisConfig, target: &T, q0: &ExplorationDensity, rng: &mut R) -> Result<AisOutput>
where
    T: Target + ?Sized,
    R: Rng + ?Sized,
{
    config.check()?;
    check_dim(target.dim(), q0.dim())?;
    let d = target.dim();
    let betas = geometric_schedule(config.levels, config.beta_min)?;
    let scale = config.scale_for(d);
    let mut points = vec![0.0; config.batch * d];
    let mut log_weights = vec![0.0; config.batch];
    let mut accepted = vec![0usize; config.levels];
    let mut evaluations = 0usize;

    for (x, lw) in points.chunks_exact_mut(d).zip(log_weights.iter_mut()) {
        q0.sample_into(rng, x);
        for k in 1..=config.levels {
            let (prev, beta) = (betas[k - 1], betas[k]);
            let lf = target.log_density(x);
            evaluations += 1;
            let lq = q0.log_density(x);
            let incr = (beta - prev) * (lf - lq);
            if incr.is_nan() {
                return Err(Error::Internal("NaN incremental AIS weight".into()));
            }
            *lw += incr;
            let tempered = |y: &[f64]| {
                let f = target.log_density(y);
                (1.0 - beta) * q0.log_density(y) + beta * f
            };
            let mut log_px = (1.0 - beta) * lq + beta * lf;
            for _ in 0..config.n_mh {
                if rw_metropolis_step(tempered, x, &mut log_px, scale, rng) {
                    accepted[k - 1] += 1;
                }
                evaluations += 1;
            }
        }
    }

    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateWeights("all AIS weights are zero".into()));
    }
    let weights = log_weights.iter().map(|l| (l - max).exp()).collect();
    let moves = (config.batch * config.n_mh) as f64;
    let acceptance_rates = accepted
        .iter()
        .map(|&a| if moves > 0.0 { a as f64 / moves } else { 0.0 })
        .collect();
    Ok(AisOutput {
        samples: WeightedSampleSet::new(points, d, weights)?,
        log_weights,
        betas,
        acceptance_rates,
        evaluations,
        nominal_evaluations: config.nominal_evaluations(),
    })
}
