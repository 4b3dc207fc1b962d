//! Breiman's waveform generator (21 attributes, three classes).
//!
//! Each record mixes two of three triangular base waves with a uniform
//! coefficient and adds unit Gaussian noise. The binary task used for the
//! logistic benchmark labels class 0 as `+1` and merges classes 1 and 2 into
//! `-1`. Features are standardized column-wise over the full generated set.

use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};

use super::LabeledDataset;
use crate::rng::seeded_rng;

pub const N_FEATURES: usize = 21;

/// Number of records in the reference benchmark.
pub const STANDARD_SIZE: usize = 5000;

fn base_wave(peak: usize, i: usize) -> f64 {
    (6.0 - (i as f64 - peak as f64).abs()).max(0.0)
}

/// One raw record: 21 features and the class in `{0, 1, 2}`.
pub fn waveform_record<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) -> usize {
    // base waves peak at attributes 7, 15 and 11 (1-based)
    const PAIRS: [(usize, usize); 3] = [(7, 15), (7, 11), (15, 11)];
    let class = rng.random_range(0..3usize);
    let u: f64 = rng.random();
    let (a, b) = PAIRS[class];
    for (j, o) in out.iter_mut().enumerate() {
        let i = j + 1;
        let noise: f64 = StandardNormal.sample(rng);
        *o = u * base_wave(a, i) + (1.0 - u) * base_wave(b, i) + noise;
    }
    class
}

/// `n` standardized binary records generated from `seed`.
pub fn generate(n: usize, seed: u64) -> LabeledDataset {
    let mut rng = seeded_rng(seed);
    let mut features = vec![0.0; n * N_FEATURES];
    let mut labels = Vec::with_capacity(n);
    for row in features.chunks_mut(N_FEATURES) {
        let class = waveform_record(&mut rng, row);
        labels.push(if class == 0 { 1.0 } else { -1.0 });
    }
    if n > 1 {
        for j in 0..N_FEATURES {
            let mean = features.iter().skip(j).step_by(N_FEATURES).sum::<f64>() / n as f64;
            let var = features
                .iter()
                .skip(j)
                .step_by(N_FEATURES)
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / (n - 1) as f64;
            let sd = var.sqrt();
            for v in features.iter_mut().skip(j).step_by(N_FEATURES) {
                *v = (*v - mean) / sd;
            }
        }
    }
    LabeledDataset::new(features, N_FEATURES, labels).expect("labels are binary by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_balance_and_standardization() {
        let d = generate(3000, 4);
        assert_eq!(d.n_features(), N_FEATURES);
        let pos = d.labels().iter().filter(|&&c| c > 0.0).count() as f64 / 3000.0;
        assert!((pos - 1.0 / 3.0).abs() < 0.03, "{pos}");
        for j in 0..N_FEATURES {
            let m: f64 = (0..d.len()).map(|i| d.row(i)[j]).sum::<f64>() / d.len() as f64;
            assert!(m.abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(50, 9), generate(50, 9));
        assert_ne!(generate(50, 9), generate(50, 10));
    }
}
