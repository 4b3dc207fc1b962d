use super::validate::{Decay, ScheduleDescriptor};
use crate::error::{Error, Result};

/// Step sizes, bandwidths, mixture rates and subsample sizes, with a burn-in phase.
///
/// * `gamma_n = gamma_scale / (n + gamma_offset)^gamma_exponent`
/// * `b_n = (bandwidth_scale / sqrt d) (m n / bandwidth_reference + 1)^(-r)`, with
///   `r = bandwidth_exponent` or `1 / (4 + d)` when unset
/// * `lambda_n = min(1, lambda_scale / ln(m n + lambda_offset))`, replaced by
///   `burnin_lambda` for `n <= burnin_steps`
/// * `ell = ceil(particles^subsample_exponent)`
///
/// The first step draws `burnin_batch` points instead of `m` unless it is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
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
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            gamma_scale: 1.0,
            gamma_offset: 10.0,
            gamma_exponent: 1.0,
            bandwidth_scale: 0.4,
            bandwidth_reference: 10_000.0,
            bandwidth_exponent: None,
            lambda_scale: 1.0,
            lambda_offset: 10.0,
            subsample_exponent: 0.5,
            burnin_batch: 2000,
            burnin_lambda: 0.5,
            burnin_steps: 10,
        }
    }
}

/// Schedule values at one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleValues {
    pub gamma: f64,
    pub bandwidth: f64,
    pub lambda: f64,
}

impl Schedule {
    /// The default schedule without burn-in.
    pub fn without_burnin() -> Self {
        Self { burnin_batch: 0, burnin_steps: 0, ..Self::default() }
    }

    pub fn has_burnin(&self) -> bool {
        self.burnin_batch > 0 || self.burnin_steps > 0
    }

    pub fn check(&self) -> Result<()> {
        let positive = [
            ("gamma_scale", self.gamma_scale),
            ("bandwidth_scale", self.bandwidth_scale),
            ("bandwidth_reference", self.bandwidth_reference),
            ("lambda_scale", self.lambda_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma_offset >= 0.0) || !(self.gamma_exponent >= 0.0) {
            return Err(Error::Argument("gamma offset and exponent must be nonnegative".into()));
        }
        if let Some(r) = self.bandwidth_exponent {
            if !(r >= 0.0) {
                return Err(Error::Argument(format!("bandwidth_exponent must be nonnegative, got {r}")));
            }
        }
        if !(self.lambda_offset > 1.0) {
            return Err(Error::Argument("lambda_offset must exceed 1".into()));
        }
        if !(0.0..=1.0).contains(&self.subsample_exponent) {
            return Err(Error::Argument("subsample_exponent must lie in [0, 1]".into()));
        }
        if !(self.burnin_lambda > 0.0 && self.burnin_lambda <= 1.0) {
            return Err(Error::Argument("burnin_lambda must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn gamma(&self, n: usize) -> f64 {
        self.gamma_scale / (n as f64 + self.gamma_offset).powf(self.gamma_exponent)
    }

    pub fn bandwidth_rate(&self, d: usize) -> f64 {
        self.bandwidth_exponent.unwrap_or(1.0 / (4.0 + d as f64))
    }

    pub fn bandwidth(&self, n: usize, m: usize, d: usize) -> f64 {
        let mn = (m * n) as f64;
        self.bandwidth_scale / (d as f64).sqrt()
            * (mn / self.bandwidth_reference + 1.0).powf(-self.bandwidth_rate(d))
    }

    pub fn lambda(&self, n: usize, m: usize) -> f64 {
        if n <= self.burnin_steps {
            return self.burnin_lambda;
        }
        let mn = (m * n) as f64;
        (self.lambda_scale / (mn + self.lambda_offset).ln()).min(1.0)
    }

    /// Number of points drawn at step `n` for nominal batch size `m`.
    pub fn batch_size(&self, n: usize, m: usize) -> usize {
        if n == 1 && self.burnin_batch > 0 {
            self.burnin_batch
        } else {
            m
        }
    }

    /// `ceil(particles^delta)`, at least one.
    pub fn subsample_size(&self, particles: usize) -> usize {
        ((particles as f64).powf(self.subsample_exponent).ceil() as usize).max(1)
    }

    pub fn values(&self, n: usize, m: usize, d: usize) -> Result<ScheduleValues> {
        if n < 1 {
            return Err(Error::Argument("steps are numbered from 1".into()));
        }
        if m < 1 || d < 1 {
            return Err(Error::Argument("batch size and dimension must be positive".into()));
        }
        let gamma = self.gamma(n);
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Argument(format!("gamma_{n} = {gamma} is outside (0, 1)")));
        }
        Ok(ScheduleValues {
            gamma,
            bandwidth: self.bandwidth(n, m, d),
            lambda: self.lambda(n, m),
        })
    }

    /// Power-law description of the post-burn-in tails, for the validator.
    pub fn descriptor(&self, d: usize) -> ScheduleDescriptor {
        ScheduleDescriptor {
            gamma: Decay::power(self.gamma_scale, self.gamma_exponent),
            bandwidth: Decay::power(self.bandwidth_scale, self.bandwidth_rate(d)),
            lambda: Decay::InverseLog { scale: self.lambda_scale },
        }
    }
}
