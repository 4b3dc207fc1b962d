//! Unnormalized target densities, exploration densities and datasets.

mod exploration;
mod logistic;
mod toy;
pub mod waveform;

use rand::Rng;

use crate::error::{check_dim, Error, Result};

pub use exploration::{ExplorationDensity, ExplorationFamily, DEFAULT_STUDENT_DOF};
pub use logistic::{
    load_dataset, logistic_posterior, posterior_predict, predictive_accuracy, read_dataset,
    split_dataset, LabeledDataset, LogisticPosterior,
};
pub use toy::{default_exploration, make_toy_target, DiagGaussian, ToyTarget, ToyTargetSpec};

/// An unnormalized density `f_u` on `R^dim`.
///
/// Implementations return `-inf` outside the support and must never panic on
/// finite input of the right length.
pub trait Target: Send + Sync {
    fn dim(&self) -> usize;

    /// `log f_u(x)` without a length check; used on hot paths.
    fn log_density(&self, x: &[f64]) -> f64;

    /// `log f_u(x)`.
    fn log_unnorm_density(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.log_density(x))
    }

    /// `log ∫ f_u` when known in closed form.
    fn log_normalizer(&self) -> Option<f64> {
        None
    }

    /// `m` exact draws from the normalized target, row-major `m x dim`.
    fn reference_sample(&self, m: usize, rng: &mut dyn Rng) -> Result<Vec<f64>> {
        let _ = (m, rng);
        Err(Error::Unsupported(
            "target has no exact reference sampler".into(),
        ))
    }
}

impl<T: Target + ?Sized> Target for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn log_normalizer(&self) -> Option<f64> {
        (**self).log_normalizer()
    }
    fn reference_sample(&self, m: usize, rng: &mut dyn Rng) -> Result<Vec<f64>> {
        (**self).reference_sample(m, rng)
    }
}

impl<T: Target + ?Sized> Target for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn log_normalizer(&self) -> Option<f64> {
        (**self).log_normalizer()
    }
    fn reference_sample(&self, m: usize, rng: &mut dyn Rng) -> Result<Vec<f64>> {
        (**self).reference_sample(m, rng)
    }
}

/// `c * f_u` for a fixed `c = exp(log_scale)`.
#[derive(Clone, Debug)]
pub struct ScaledTarget<T> {
    inner: T,
    log_scale: f64,
}

impl<T: Target> ScaledTarget<T> {
    pub fn new(inner: T, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Argument(format!("scale must be positive, got {scale}")));
        }
        Ok(Self {
            inner,
            log_scale: scale.ln(),
        })
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: Target> Target for ScaledTarget<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        self.inner.log_density(x) + self.log_scale
    }
    fn log_normalizer(&self) -> Option<f64> {
        self.inner.log_normalizer().map(|z| z + self.log_scale)
    }
    fn reference_sample(&self, m: usize, rng: &mut dyn Rng) -> Result<Vec<f64>> {
        self.inner.reference_sample(m, rng)
    }
}
