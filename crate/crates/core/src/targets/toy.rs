use std::f64::consts::PI;

use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};

use super::exploration::{ExplorationDensity, ExplorationFamily, DEFAULT_STUDENT_DOF};
use super::Target;
use crate::error::{Error, Result};

/// The synthetic benchmark targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToyTargetSpec {
    /// Gaussian far from the exploration density: mean `(5/sqrt d) 1_d`, covariance `(0.4^2/d) I_d`.
    ColdStart(usize),
    /// Equal-weight mixture with means `±(1/(2 sqrt d)) 1_d`, covariance `(0.4^2/d) I_d`.
    GaussianMixture(usize),
    /// As `GaussianMixture` with covariance `(0.4^2/d) Diag(10, 1, ..., 1)`.
    AnisotropicMixture(usize),
    /// Four modes at `(0,0), (10,0), (0,10), (10,10)` with covariance `0.1 I_2`.
    FourModes2D,
}

impl ToyTargetSpec {
    /// Resolve an experiment name and dimension.
    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        match name {
            "coldstart" => Ok(Self::ColdStart(dim)),
            "mixture" => Ok(Self::GaussianMixture(dim)),
            "anisotropic" => Ok(Self::AnisotropicMixture(dim)),
            "fourmodes" if dim == 2 => Ok(Self::FourModes2D),
            "fourmodes" => Err(Error::Argument(format!(
                "the four-mode target is two-dimensional, got dim {dim}"
            ))),
            other => Err(Error::Argument(format!("unknown toy target `{other}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::ColdStart(d) | Self::GaussianMixture(d) | Self::AnisotropicMixture(d) => d,
            Self::FourModes2D => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ColdStart(_) => "coldstart",
            Self::GaussianMixture(_) => "mixture",
            Self::AnisotropicMixture(_) => "anisotropic",
            Self::FourModes2D => "fourmodes",
        }
    }
}

/// Gaussian with diagonal covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagGaussian {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl DiagGaussian {
    fn log_norm(&self) -> f64 {
        -0.5 * self
            .var
            .iter()
            .map(|v| (2.0 * PI * v).ln())
            .sum::<f64>()
    }

    fn quad(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.mean)
            .zip(&self.var)
            .map(|((a, m), v)| (a - m) * (a - m) / v)
            .sum()
    }
}

/// A finite Gaussian mixture with an exact sampler.
///
/// A single-component target (cold start) is represented unnormalized:
/// `log f_u(x) = -|x - mu|^2 / (2 sigma^2)`, which peaks at zero. Mixtures are
/// stored normalized.
#[derive(Clone, Debug)]
pub struct ToyTarget {
    spec: ToyTargetSpec,
    weights: Vec<f64>,
    components: Vec<DiagGaussian>,
    log_weights_norm: Vec<f64>,
    log_normalizer: f64,
}

pub fn make_toy_target(spec: ToyTargetSpec) -> Result<ToyTarget> {
    let d = spec.dim();
    if d == 0 {
        return Err(Error::Argument("dimension must be positive".into()));
    }
    let df = d as f64;
    let base_var = 0.4 * 0.4 / df;
    let (weights, components) = match spec {
        ToyTargetSpec::ColdStart(_) => (
            vec![1.0f64],
            vec![DiagGaussian {
                mean: vec![5.0 / df.sqrt(); d],
                var: vec![base_var; d],
            }],
        ),
        ToyTargetSpec::GaussianMixture(_) | ToyTargetSpec::AnisotropicMixture(_) => {
            let mut var = vec![base_var; d];
            if matches!(spec, ToyTargetSpec::AnisotropicMixture(_)) {
                var[0] *= 10.0;
            }
            let c = 1.0 / (2.0 * df.sqrt());
            (
                vec![0.5, 0.5],
                vec![
                    DiagGaussian { mean: vec![c; d], var: var.clone() },
                    DiagGaussian { mean: vec![-c; d], var },
                ],
            )
        }
        ToyTargetSpec::FourModes2D => (
            vec![0.25; 4],
            [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]]
                .iter()
                .map(|m| DiagGaussian { mean: m.to_vec(), var: vec![0.1, 0.1] })
                .collect(),
        ),
    };
    let single = components.len() == 1;
    let log_weights_norm = weights
        .iter()
        .zip(&components)
        .map(|(w, c): (&f64, &DiagGaussian)| if single { 0.0 } else { w.ln() + c.log_norm() })
        .collect();
    let log_normalizer = if single { -components[0].log_norm() } else { 0.0 };
    Ok(ToyTarget {
        spec,
        weights,
        components,
        log_weights_norm,
        log_normalizer,
    })
}

/// The exploration density paired with each toy target in the experiments.
///
/// Cold start uses a Gaussian `N(0, (5/d) I_d)`; the mixtures use a Student-t
/// with location 0 and scale `(5/d) I_d`; the four-mode target uses a
/// Student-t at `(5, 5)` with scale `10 I_2`.
pub fn default_exploration(spec: ToyTargetSpec) -> Result<ExplorationDensity> {
    let d = spec.dim();
    let t = ExplorationFamily::StudentT { dof: DEFAULT_STUDENT_DOF };
    match spec {
        ToyTargetSpec::ColdStart(_) => {
            ExplorationDensity::isotropic(ExplorationFamily::Gaussian, vec![0.0; d], 5.0 / d as f64)
        }
        ToyTargetSpec::GaussianMixture(_) | ToyTargetSpec::AnisotropicMixture(_) => {
            ExplorationDensity::isotropic(t, vec![0.0; d], 5.0 / d as f64)
        }
        ToyTargetSpec::FourModes2D => ExplorationDensity::isotropic(t, vec![5.0, 5.0], 10.0),
    }
}

impl ToyTarget {
    pub fn spec(&self) -> ToyTargetSpec {
        self.spec
    }

    pub fn components(&self) -> &[DiagGaussian] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized density `f(x)`.
    pub fn density(&self, x: &[f64]) -> f64 {
        (self.log_density(x) - self.log_normalizer).exp()
    }

    /// Index of the component mean nearest to `x`.
    pub fn nearest_component(&self, x: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (k, c) in self.components.iter().enumerate() {
            let r: f64 = x.iter().zip(&c.mean).map(|(a, m)| (a - m) * (a - m)).sum();
            if r < best.1 {
                best = (k, r);
            }
        }
        best.0
    }
}

impl Target for ToyTarget {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        if self.components.len() == 1 {
            return -0.5 * self.components[0].quad(x);
        }
        let mut terms = [0.0f64; 4];
        let mut max = f64::NEG_INFINITY;
        for (k, c) in self.components.iter().enumerate() {
            let t = self.log_weights_norm[k] - 0.5 * c.quad(x);
            terms[k] = t;
            max = max.max(t);
        }
        if !max.is_finite() {
            return max;
        }
        let s: f64 = terms[..self.components.len()]
            .iter()
            .map(|t| (t - max).exp())
            .sum();
        max + s.ln()
    }

    fn log_normalizer(&self) -> Option<f64> {
        Some(self.log_normalizer)
    }

    fn reference_sample(&self, m: usize, rng: &mut dyn Rng) -> Result<Vec<f64>> {
        let d = self.dim();
        let k = self.components.len();
        let mut out = Vec::with_capacity(m * d);
        for _ in 0..m {
            let c = if k == 1 {
                &self.components[0]
            } else {
                // all mixtures here have equal weights
                &self.components[rng.random_range(0..k)]
            };
            for j in 0..d {
                let z: f64 = StandardNormal.sample(rng);
                out.push(c.mean[j] + c.var[j].sqrt() * z);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cold_start_parameters() {
        let t = make_toy_target(ToyTargetSpec::ColdStart(4)).unwrap();
        assert_eq!(t.components()[0].mean, vec![2.5; 4]);
        assert!((t.components()[0].var[0] - 0.04).abs() < 1e-15);
        assert_eq!(t.log_unnorm_density(&[2.5; 4]).unwrap(), 0.0);
    }

    #[test]
    fn mixture_modes_and_anisotropy() {
        let t = make_toy_target(ToyTargetSpec::GaussianMixture(1)).unwrap();
        assert_eq!(t.components()[0].mean, vec![0.5]);
        assert_eq!(t.components()[1].mean, vec![-0.5]);
        let a = make_toy_target(ToyTargetSpec::AnisotropicMixture(2)).unwrap();
        for c in a.components() {
            assert!((c.var[0] - 0.8).abs() < 1e-15);
            assert!((c.var[1] - 0.08).abs() < 1e-15);
        }
    }

    #[test]
    fn four_modes_value_at_origin() {
        let t = make_toy_target(ToyTargetSpec::FourModes2D).unwrap();
        let own = 0.25 / (2.0 * PI * 0.1);
        let v = t.log_unnorm_density(&[0.0, 0.0]).unwrap().exp();
        assert!((v - own).abs() / own < 1e-14);
        // cross-mode contributions are far below 1e-100
        let cross = 0.25 / (2.0 * PI * 0.1) * (-100.0f64 / 0.2).exp();
        assert!(cross < 1e-100);
    }

    #[test]
    fn four_modes_requires_two_dimensions() {
        assert!(matches!(
            ToyTargetSpec::from_name("fourmodes", 3),
            Err(Error::Argument(_))
        ));
        assert!(ToyTargetSpec::from_name("fourmodes", 2).is_ok());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = make_toy_target(ToyTargetSpec::ColdStart(3)).unwrap();
        assert!(matches!(
            t.log_unnorm_density(&[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
