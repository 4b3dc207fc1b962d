//! Distances and estimators for weighted particle sets.

mod estimate;
mod grid;
mod wasserstein;

pub use estimate::{clt_diagnostic, effective_sample_size, self_normalized_estimate, CltReport};
pub use grid::{grid_distance, GridDistance, GridSpec};
pub use wasserstein::{sliced_w2, w2_1d, weighted_quantile, StepQuantile, DEFAULT_PROJECTIONS};

use crate::error::{check_dim, Error, Result};

/// Points in `R^dim` with nonnegative weights, used in self-normalized form.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSampleSet {
    points: Vec<f64>,
    dim: usize,
    weights: Vec<f64>,
}

impl WeightedSampleSet {
    /// `points` is row-major `len x dim`.
    pub fn new(points: Vec<f64>, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        check_dim(weights.len() * dim, points.len())?;
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Argument(format!("weights must be finite and nonnegative, got {w}")));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateWeights("weights sum to zero".into()));
        }
        Ok(Self { points, dim, weights })
    }

    /// Equal weights.
    pub fn uniform(points: Vec<f64>, dim: usize) -> Result<Self> {
        let n = if dim == 0 { 0 } else { points.len() / dim };
        Self::new(points, dim, vec![1.0; n])
    }

    /// No validation; for callers that must represent degenerate sets.
    pub fn from_parts_unchecked(points: Vec<f64>, dim: usize, weights: Vec<f64>) -> Self {
        Self { points, dim, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weights divided by their sum.
    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        let total = self.total_weight();
        if !(total > 0.0) {
            return Err(Error::DegenerateWeights("weights sum to zero".into()));
        }
        Ok(self.weights.iter().map(|w| w / total).collect())
    }

    /// `<theta, X_i>` for every point.
    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        self.points
            .chunks_exact(self.dim)
            .map(|p| p.iter().zip(theta).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// The subset of rows in `range`, keeping their weights.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        let d = self.dim;
        Self::new(
            self.points[range.start * d..range.end * d].to_vec(),
            d,
            self.weights[range].to_vec(),
        )
    }
}
