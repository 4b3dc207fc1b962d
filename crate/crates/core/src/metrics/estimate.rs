use super::WeightedSampleSet;
use crate::error::{Error, Result};

/// `sum_i w_i h(X_i) / sum_i w_i`.
pub fn self_normalized_estimate<H>(samples: &WeightedSampleSet, h: H) -> Result<f64>
where
    H: Fn(&[f64]) -> f64,
{
    let total = samples.total_weight();
    if !(total > 0.0) {
        return Err(Error::DegenerateWeights("weights sum to zero".into()));
    }
    let mut acc = 0.0;
    for (i, &w) in samples.weights().iter().enumerate() {
        if w > 0.0 {
            acc += w * h(samples.point(i));
        }
    }
    Ok(acc / total)
}

/// Kish effective sample size `(sum w)^2 / sum w^2`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// Outcome of an empirical normality check for the self-normalized estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct CltReport {
    /// `sqrt(n) (mu_hat - mu)` for each repetition.
    pub rescaled_errors: Vec<f64>,
    /// Sample variance of `rescaled_errors`.
    pub empirical_var: f64,
    /// `mu(h^2) - mu(h)^2`.
    pub target_var: f64,
}

impl CltReport {
    /// `empirical_var / target_var`; infinite or NaN when the target variance is zero.
    pub fn ratio(&self) -> f64 {
        self.empirical_var / self.target_var
    }
}

/// Runs `reps` independent chains of budget `n` through `run(rep)` and
/// compares the spread of `sqrt(n) (mu_hat_n(h) - mu(h))` with
/// `sigma^2(h) = mu(h^2) - mu(h)^2`.
pub fn clt_diagnostic<F, H>(
    mut run: F,
    h: H,
    mu_h: f64,
    mu_h2: f64,
    n: usize,
    reps: usize,
) -> Result<CltReport>
where
    F: FnMut(usize) -> Result<WeightedSampleSet>,
    H: Fn(&[f64]) -> f64,
{
    if reps < 20 {
        return Err(Error::Argument(format!(
            "at least 20 repetitions are needed, got {reps}"
        )));
    }
    if n == 0 {
        return Err(Error::Argument("budget must be positive".into()));
    }
    let root_n = (n as f64).sqrt();
    let mut errs = Vec::with_capacity(reps);
    for rep in 0..reps {
        let samples = run(rep)?;
        let est = self_normalized_estimate(&samples, &h)?;
        errs.push(root_n * (est - mu_h));
    }
    let mean = errs.iter().sum::<f64>() / reps as f64;
    let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (reps - 1) as f64;
    Ok(CltReport {
        rescaled_errors: errs,
        empirical_var: var,
        target_var: (mu_h2 - mu_h * mu_h).max(0.0),
    })
}
