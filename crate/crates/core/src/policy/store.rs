use rand::{Rng, RngExt};

use super::prefix_tree::PrefixSumTree;
use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::metrics::WeightedSampleSet;

/// Stored scores are renormalized once the largest leaves `[1e-100, 1e100]`.
const LOG_RESCALE_HIGH: f64 = 230.258_509_299_404_57;
const LOG_RESCALE_LOW: f64 = -230.258_509_299_404_57;

/// Which weights to attach to particles when exporting them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightKind {
    /// Importance weights `w_i = f_u(X_i) / q(X_i)`.
    #[default]
    Raw,
    /// Mixture weights `W_{i,n}` of the current policy.
    Effective,
}

impl std::str::FromStr for WeightKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "effective" => Ok(Self::Effective),
            other => Err(Error::Argument(format!("unknown weight kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for WeightKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Raw => "raw",
            Self::Effective => "effective",
        })
    }
}

/// Particles of the kernel mixture and their weights.
///
/// The effective weight of particle `i` after step `n` is
/// `W_{i,n} = w_i^eta gamma_i prod_{j=i+1}^{n} (1 - gamma_j)`, divided by the
/// batch size for mini-batch insertions. Writing `Psi_n = prod_{j<=n} (1 - gamma_j)`,
/// each particle stores the step-independent score `w_i^eta gamma_i / Psi_i`
/// and `W_{i,n}` is recovered as `score_i * exp(decay_log + rescale_offset)`
/// with `decay_log = log Psi_n`. Advancing a step therefore touches a single
/// accumulator instead of every particle, and the common factor cancels in
/// every normalized quantity.
#[derive(Clone, Debug)]
pub struct ParticleStore {
    kernel: Kernel,
    eta: f64,
    positions: Vec<f64>,
    bandwidths: Vec<f64>,
    inv_bandwidths: Vec<f64>,
    log_raw_weights: Vec<f64>,
    tree: PrefixSumTree,
    /// `log score_i` at zero rescale offset; exact even where the stored score underflows.
    log_scores: Vec<f64>,
    /// `score_i / b_i^d`, the per-particle factor of the mixture density.
    kernel_coef: Vec<f64>,
    batch_starts: Vec<usize>,
    decay_log: f64,
    rescale_offset: f64,
    max_score: f64,
}

impl ParticleStore {
    pub fn new(kernel: Kernel, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Argument(format!("eta must lie in [0, 1], got {eta}")));
        }
        Ok(Self {
            kernel,
            eta,
            positions: Vec::new(),
            bandwidths: Vec::new(),
            inv_bandwidths: Vec::new(),
            log_raw_weights: Vec::new(),
            tree: PrefixSumTree::new(),
            log_scores: Vec::new(),
            kernel_coef: Vec::new(),
            batch_starts: Vec::new(),
            decay_log: 0.0,
            rescale_offset: 0.0,
            max_score: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.bandwidths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bandwidths.is_empty()
    }

    /// Number of completed insertion steps.
    pub fn steps(&self) -> usize {
        self.batch_starts.len()
    }

    /// Index range of the particles inserted at `step` (1-based).
    pub fn batch_range(&self, step: usize) -> std::ops::Range<usize> {
        let start = self.batch_starts[step - 1];
        let end = self.batch_starts.get(step).copied().unwrap_or(self.len());
        start..end
    }

    pub fn position(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.positions[i * d..(i + 1) * d]
    }

    /// Row-major `len x dim` positions.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn bandwidth(&self, i: usize) -> f64 {
        self.bandwidths[i]
    }

    pub fn raw_weight(&self, i: usize) -> f64 {
        self.log_raw_weights[i].exp()
    }

    pub fn log_raw_weights(&self) -> &[f64] {
        &self.log_raw_weights
    }

    /// Stored score at the current rescale offset.
    pub fn score(&self, i: usize) -> f64 {
        self.tree.get(i)
    }

    pub fn decay_log(&self) -> f64 {
        self.decay_log
    }

    pub fn rescale_offset(&self) -> f64 {
        self.rescale_offset
    }

    fn scale_factor(&self) -> f64 {
        (self.decay_log + self.rescale_offset).exp()
    }

    /// `W_{i,n}` at the current step.
    pub fn effective_weight(&self, i: usize) -> f64 {
        (self.log_scores[i] + self.decay_log).exp()
    }

    pub fn effective_weights(&self) -> Vec<f64> {
        self.log_scores.iter().map(|l| (l + self.decay_log).exp()).collect()
    }

    /// `W_{i,n} / sum_k W_{k,n}`; zero when every weight is zero.
    pub fn selection_probability(&self, i: usize) -> f64 {
        let total = self.tree.total();
        if !(total > 0.0) {
            return 0.0;
        }
        (self.log_scores[i] - self.rescale_offset - total.ln()).exp()
    }

    /// `sum_i W_{i,n}`, the mass of the unnormalized mixture.
    pub fn total_mass(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.tree.total() * self.scale_factor()
        }
    }

    pub(crate) fn score_total(&self) -> f64 {
        self.tree.total()
    }

    /// `sum_i score_i K_{b_i}(x - X_i)`; divide by the score total to get the
    /// normalized kernel mixture. Cost is one kernel evaluation per particle.
    pub(crate) fn weighted_kernel_sum(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let kernel = &self.kernel;
        let peak = kernel.peak();
        match kernel.family() {
            crate::kernels::KernelFamily::Gaussian => {
                let mut acc = 0.0;
                for ((center, &coef), &inv_b) in self
                    .positions
                    .chunks_exact(d)
                    .zip(&self.kernel_coef)
                    .zip(&self.inv_bandwidths)
                {
                    if coef == 0.0 {
                        continue;
                    }
                    let mut r2 = 0.0;
                    for (a, c) in x.iter().zip(center) {
                        let t = a - c;
                        r2 += t * t;
                    }
                    acc += coef * (-0.5 * r2 * inv_b * inv_b).exp();
                }
                acc * peak
            }
            crate::kernels::KernelFamily::Epanechnikov => {
                let mut acc = 0.0;
                for (i, center) in self.positions.chunks_exact(d).enumerate() {
                    let coef = self.tree.get(i);
                    if coef == 0.0 {
                        continue;
                    }
                    acc += coef * kernel.eval_scaled(x, center, self.inv_bandwidths[i]);
                }
                acc
            }
        }
    }

    /// Inserts one particle as a full step (batch of size one).
    pub fn insert_particle(&mut self, x: &[f64], raw_w: f64, gamma: f64, b: f64) -> Result<()> {
        if !(raw_w >= 0.0) {
            return Err(Error::Argument(format!("raw weight must be nonnegative, got {raw_w}")));
        }
        self.insert_batch(x, &[raw_w.ln()], gamma, b)
    }

    /// Inserts one step's batch.
    ///
    /// `positions` is row-major `m x d` and `log_raw_weights` holds `log w` for
    /// each row. Existing particles decay by `1 - gamma` once, and each new
    /// particle receives effective weight `w^eta gamma / m`.
    pub fn insert_batch(
        &mut self,
        positions: &[f64],
        log_raw_weights: &[f64],
        gamma: f64,
        b: f64,
    ) -> Result<()> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Argument(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Argument(format!("bandwidth must be positive, got {b}")));
        }
        let m = log_raw_weights.len();
        if m == 0 {
            return Err(Error::Argument("empty batch".into()));
        }
        check_dim(m * self.dim(), positions.len())?;
        if let Some(bad) = log_raw_weights
            .iter()
            .find(|v| v.is_nan() || **v == f64::INFINITY)
        {
            return Err(Error::Internal(format!(
                "non-finite importance weight (log w = {bad})"
            )));
        }

        self.decay_log += (-gamma).ln_1p();
        let base = gamma.ln() - (m as f64).ln() - self.decay_log - self.rescale_offset;
        let mut log_scores: Vec<f64> = log_raw_weights
            .iter()
            .map(|&lw| {
                // 0^0 = 1
                let powered = if self.eta == 0.0 { 0.0 } else { self.eta * lw };
                powered + base
            })
            .collect();

        let batch_max = log_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let stored_max = if self.max_score > 0.0 {
            self.max_score.ln()
        } else {
            f64::NEG_INFINITY
        };
        let overall = batch_max.max(stored_max);
        if overall.is_finite() && !(LOG_RESCALE_LOW..=LOG_RESCALE_HIGH).contains(&overall) {
            self.shift_scale(overall);
            for s in &mut log_scores {
                *s -= overall;
            }
        }

        let inv_b = 1.0 / b;
        let coef_scale = inv_b.powi(self.dim() as i32);
        self.batch_starts.push(self.len());
        for (&ls, &lw) in log_scores.iter().zip(log_raw_weights) {
            let score = ls.exp();
            self.tree.push(score);
            self.log_scores.push(ls + self.rescale_offset);
            self.max_score = self.max_score.max(score);
            self.kernel_coef.push(score * coef_scale);
            self.inv_bandwidths.push(inv_b);
            self.bandwidths.push(b);
            self.log_raw_weights.push(lw);
        }
        self.positions.extend_from_slice(positions);
        Ok(())
    }

    /// Moves `shift` (natural log units) from the stored scores into the rescale offset.
    fn shift_scale(&mut self, shift: f64) {
        let factor = (-shift).exp();
        self.rescale_offset += shift;
        self.tree.scale(factor);
        for c in &mut self.kernel_coef {
            *c *= factor;
        }
        self.max_score *= factor;
    }

    /// Renormalizes stored scores so that the largest equals one. Effective
    /// weights are unchanged up to rounding.
    pub fn renormalize(&mut self) {
        if self.max_score > 0.0 {
            self.shift_scale(self.max_score.ln());
        }
    }

    /// Index drawn with probability `W_{i,n} / sum_k W_{k,n}` in `O(log n)`.
    /// Consumes one uniform.
    pub fn select_particle<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let total = self.tree.total();
        if self.is_empty() || !(total > 0.0) {
            return Err(Error::DegenerateWeights(
                "cannot select from an empty or zero-weight store".into(),
            ));
        }
        let u: f64 = rng.random();
        self.tree
            .find(u * total)
            .ok_or_else(|| Error::DegenerateWeights("all scores are zero".into()))
    }

    /// Particles with raw or effective weights.
    pub fn to_sample_set(&self, kind: WeightKind) -> Result<WeightedSampleSet> {
        let weights = match kind {
            WeightKind::Raw => {
                let max = self
                    .log_raw_weights
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                if !max.is_finite() {
                    return Err(Error::DegenerateWeights("all raw weights are zero".into()));
                }
                self.log_raw_weights.iter().map(|lw| (lw - max).exp()).collect()
            }
            WeightKind::Effective => {
                let max = self.log_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if !max.is_finite() {
                    return Err(Error::DegenerateWeights("all effective weights are zero".into()));
                }
                self.log_scores.iter().map(|l| (l - max).exp()).collect()
            }
        };
        WeightedSampleSet::new(self.positions.clone(), self.dim(), weights)
    }
}
