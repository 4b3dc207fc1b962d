//! Smoothing kernels with zero mean and identity covariance.
//!
//! `K` is a probability density on `R^d`; the bandwidth-scaled version
//! `K_b(x) = b^{-d} K(x / b)` has covariance `b^2 I_d`. The Epanechnikov
//! kernel is the product of one-dimensional Epanechnikov densities rescaled to
//! unit variance, so its support is the cube `[-sqrt(5), sqrt(5)]^d`.

use std::f64::consts::PI;

use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};

/// Half-width of the unit-variance Epanechnikov support.
pub const EPANECHNIKOV_RADIUS: f64 = 2.236_067_977_499_79;

/// Peak of the one-dimensional unit-variance Epanechnikov density, `3 / (4 sqrt 5)`.
const EPANECHNIKOV_PEAK: f64 = 0.75 / EPANECHNIKOV_RADIUS;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelFamily {
    #[default]
    Gaussian,
    Epanechnikov,
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(KernelFamily::Gaussian),
            "epanechnikov" => Ok(KernelFamily::Epanechnikov),
            other => Err(Error::Argument(format!("unknown kernel family `{other}`"))),
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelFamily::Gaussian => write!(f, "gaussian"),
            KernelFamily::Epanechnikov => write!(f, "epanechnikov"),
        }
    }
}

/// A smoothing kernel on `R^dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    dim: usize,
    /// `K(0)`, cached because the Gaussian normalizer is needed on every evaluation.
    peak: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("kernel dimension must be positive".into()));
        }
        let peak = match family {
            KernelFamily::Gaussian => (2.0 * PI).powf(-(dim as f64) / 2.0),
            KernelFamily::Epanechnikov => EPANECHNIKOV_PEAK.powi(dim as i32),
        };
        Ok(Self { family, dim, peak })
    }

    pub fn gaussian(dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, dim)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `K(0)`.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// `K(u)`.
    pub fn density(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim, u.len())?;
        Ok(self.eval(u))
    }

    /// `K_b(x - center) = b^{-d} K((x - center) / b)`.
    pub fn scaled_density(&self, b: f64, x: &[f64], center: &[f64]) -> Result<f64> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Argument(format!("bandwidth must be positive, got {b}")));
        }
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, center.len())?;
        Ok(self.eval_scaled(x, center, 1.0 / b))
    }

    /// Unchecked `K(u)`.
    pub(crate) fn eval(&self, u: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian => {
                let r2: f64 = u.iter().map(|v| v * v).sum();
                self.peak * (-0.5 * r2).exp()
            }
            KernelFamily::Epanechnikov => u
                .iter()
                .map(|&v| epanechnikov_1d(v))
                .product(),
        }
    }

    /// Unchecked `K_b(x - center)` given `inv_b = 1 / b`.
    #[inline]
    pub(crate) fn eval_scaled(&self, x: &[f64], center: &[f64], inv_b: f64) -> f64 {
        let scale = inv_b.powi(self.dim as i32);
        match self.family {
            KernelFamily::Gaussian => {
                let r2: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| {
                        let t = a - c;
                        t * t
                    })
                    .sum();
                scale * self.peak * (-0.5 * r2 * inv_b * inv_b).exp()
            }
            KernelFamily::Epanechnikov => {
                let mut acc = scale;
                for (a, c) in x.iter().zip(center) {
                    acc *= epanechnikov_1d((a - c) * inv_b);
                    if acc == 0.0 {
                        break;
                    }
                }
                acc
            }
        }
    }

    /// Draw `u ~ K` into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        match self.family {
            KernelFamily::Gaussian => {
                for v in out.iter_mut() {
                    *v = StandardNormal.sample(rng);
                }
            }
            KernelFamily::Epanechnikov => {
                for v in out.iter_mut() {
                    *v = EPANECHNIKOV_RADIUS * sample_epanechnikov_standard(rng);
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(rng, &mut out);
        out
    }
}

#[inline]
fn epanechnikov_1d(v: f64) -> f64 {
    let t = 1.0 - v * v / 5.0;
    if t > 0.0 {
        EPANECHNIKOV_PEAK * t
    } else {
        0.0
    }
}

/// Draw from `(3/4)(1 - u^2)` on `[-1, 1]` (median-of-three construction).
fn sample_epanechnikov_standard<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random_range(-1.0..1.0);
    let u2: f64 = rng.random_range(-1.0..1.0);
    let u3: f64 = rng.random_range(-1.0..1.0);
    if u3.abs() >= u2.abs() && u3.abs() >= u1.abs() {
        u2
    } else {
        u3
    }
}
