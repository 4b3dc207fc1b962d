use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::WeightedSampleSet;
use crate::error::{check_dim, Error, Result};

/// Number of projection directions used when none is given.
pub const DEFAULT_PROJECTIONS: usize = 100;

/// Generalized inverse of a weighted empirical CDF.
#[derive(Clone, Debug, PartialEq)]
pub struct StepQuantile {
    values: Vec<f64>,
    /// `cdf[k]` is the normalized mass at or below `values[k]`; the last entry is 1.
    cdf: Vec<f64>,
}

impl StepQuantile {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// `inf { x : F(x) >= u }` for `u` in `(0, 1]`; `u <= 0` gives the smallest atom.
    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < u);
        self.values[k.min(self.values.len() - 1)]
    }
}

/// Sorts `values`, merges ties and accumulates normalized weights.
pub fn weighted_quantile(values: &[f64], weights: &[f64]) -> Result<StepQuantile> {
    check_dim(values.len(), weights.len())?;
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Argument("NaN in quantile support".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateWeights("weights sum to zero".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut out_values = Vec::with_capacity(order.len());
    let mut cdf = Vec::with_capacity(order.len());
    let mut acc = 0.0;
    for &i in &order {
        acc += weights[i];
        if out_values.last() == Some(&values[i]) {
            *cdf.last_mut().unwrap() = acc;
        } else {
            out_values.push(values[i]);
            cdf.push(acc);
        }
    }
    for c in &mut cdf {
        *c /= acc;
    }
    *cdf.last_mut().unwrap() = 1.0;
    Ok(StepQuantile { values: out_values, cdf })
}

/// Exact `W_2` between two weighted discrete measures on the line.
///
/// Both quantile functions are constant between consecutive knots of the
/// merged CDF levels, so the integral is a finite sum.
pub fn w2_1d(mu: &StepQuantile, nu: &StepQuantile) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = 0.0;
    let mut acc = 0.0;
    while i < mu.values.len() && j < nu.values.len() {
        let next = mu.cdf[i].min(nu.cdf[j]);
        let diff = mu.values[i] - nu.values[j];
        acc += (next - prev) * diff * diff;
        prev = next;
        if mu.cdf[i] <= next {
            i += 1;
        }
        if nu.cdf[j] <= next {
            j += 1;
        }
    }
    acc.max(0.0).sqrt()
}

/// Monte Carlo `E_theta[W_2(theta#a, theta#b)^2]` over `n_proj` uniform directions.
///
/// No outer square root is taken. Directions are normalized Gaussian draws;
/// in one dimension the only direction (up to sign) is used and the result is
/// exact.
pub fn sliced_w2<R: Rng + ?Sized>(
    a: &WeightedSampleSet,
    b: &WeightedSampleSet,
    n_proj: usize,
    rng: &mut R,
) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    if n_proj == 0 {
        return Err(Error::Argument("need at least one projection".into()));
    }
    let d = a.dim();
    if d == 1 {
        let w = w2_1d(
            &weighted_quantile(a.points(), a.weights())?,
            &weighted_quantile(b.points(), b.weights())?,
        );
        return Ok(w * w);
    }
    let mut theta = vec![0.0; d];
    let mut acc = 0.0;
    for _ in 0..n_proj {
        let norm = loop {
            for t in theta.iter_mut() {
                *t = StandardNormal.sample(rng);
            }
            let n2: f64 = theta.iter().map(|t| t * t).sum();
            if n2 > 0.0 {
                break n2.sqrt();
            }
        };
        for t in theta.iter_mut() {
            *t /= norm;
        }
        let qa = weighted_quantile(&a.project(&theta), a.weights())?;
        let qb = weighted_quantile(&b.project(&theta), b.weights())?;
        let w = w2_1d(&qa, &qb);
        acc += w * w;
    }
    Ok(acc / n_proj as f64)
}
