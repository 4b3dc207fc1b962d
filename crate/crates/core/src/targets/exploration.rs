use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_dim, Error, Result};

/// Degrees of freedom used for Student-t exploration densities unless overridden.
pub const DEFAULT_STUDENT_DOF: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExplorationFamily {
    Gaussian,
    StudentT { dof: f64 },
}

/// The fixed, normalized density `q0` mixed into every policy.
///
/// The scale matrix is diagonal; `scale[j]` is its `j`-th diagonal entry
/// (the variance for the Gaussian family).
#[derive(Clone, Debug)]
pub struct ExplorationDensity {
    family: ExplorationFamily,
    location: Vec<f64>,
    scale: Vec<f64>,
    inv_scale: Vec<f64>,
    sd: Vec<f64>,
    log_norm: f64,
    chi2: Option<ChiSquared<f64>>,
}

impl ExplorationDensity {
    pub fn new(family: ExplorationFamily, location: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if location.is_empty() {
            return Err(Error::Argument("exploration density needs dim >= 1".into()));
        }
        check_dim(location.len(), scale.len())?;
        if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Argument("scale diagonal must be positive".into()));
        }
        let d = location.len() as f64;
        let log_det: f64 = scale.iter().map(|s| s.ln()).sum();
        let (log_norm, chi2) = match family {
            ExplorationFamily::Gaussian => (-0.5 * d * (2.0 * PI).ln() - 0.5 * log_det, None),
            ExplorationFamily::StudentT { dof } => {
                if !(dof > 0.0) || !dof.is_finite() {
                    return Err(Error::Argument(format!("degrees of freedom must be positive, got {dof}")));
                }
                let c = ln_gamma(0.5 * (dof + d)) - ln_gamma(0.5 * dof) - 0.5 * d * (dof * PI).ln()
                    - 0.5 * log_det;
                let chi2 = ChiSquared::new(dof)
                    .map_err(|e| Error::Argument(format!("chi-square({dof}): {e}")))?;
                (c, Some(chi2))
            }
        };
        Ok(Self {
            family,
            inv_scale: scale.iter().map(|s| 1.0 / s).collect(),
            sd: scale.iter().map(|s| s.sqrt()).collect(),
            location,
            scale,
            log_norm,
            chi2,
        })
    }

    pub fn gaussian(location: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        Self::new(ExplorationFamily::Gaussian, location, variance)
    }

    pub fn student_t(location: Vec<f64>, scale: Vec<f64>, dof: f64) -> Result<Self> {
        Self::new(ExplorationFamily::StudentT { dof }, location, scale)
    }

    /// Isotropic helper: scale matrix `scale * I_d`.
    pub fn isotropic(family: ExplorationFamily, location: Vec<f64>, scale: f64) -> Result<Self> {
        let d = location.len();
        Self::new(family, location, vec![scale; d])
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub fn family(&self) -> ExplorationFamily {
        self.family
    }

    pub fn location(&self) -> &[f64] {
        &self.location
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Normalized log-density; unchecked length.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let delta: f64 = x
            .iter()
            .zip(&self.location)
            .zip(&self.inv_scale)
            .map(|((a, m), is)| {
                let t = a - m;
                t * t * is
            })
            .sum();
        match self.family {
            ExplorationFamily::Gaussian => self.log_norm - 0.5 * delta,
            ExplorationFamily::StudentT { dof } => {
                let d = self.dim() as f64;
                self.log_norm - 0.5 * (dof + d) * (delta / dof).ln_1p()
            }
        }
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.log_density(x).exp()
    }

    /// Exact draw. Consumes `dim` standard normals, then (Student-t only) one chi-square.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        for (o, sd) in out.iter_mut().zip(&self.sd) {
            let z: f64 = StandardNormal.sample(rng);
            *o = z * sd;
        }
        if let (ExplorationFamily::StudentT { dof }, Some(chi2)) = (self.family, &self.chi2) {
            let g: f64 = chi2.sample(rng);
            let factor = (dof / g).sqrt();
            for o in out.iter_mut() {
                *o *= factor;
            }
        }
        for (o, m) in out.iter_mut().zip(&self.location) {
            *o += m;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }
}
