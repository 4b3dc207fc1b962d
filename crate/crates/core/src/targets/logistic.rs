//! Bayesian logistic regression posterior and predictive evaluation.
//!
//! The sampled parameter is `(w, s)` with `s = log(beta)`: `w` has one entry
//! per feature and `beta` is the prior precision of `w`. Working with
//! `log(beta)` keeps the support equal to all of `R^d`, so kernel moves never
//! leave it; the density carries the `+ s` Jacobian of `beta = e^s`.

use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use statrs::function::gamma::ln_gamma;

use super::Target;
use crate::error::{check_dim, Error, Result};
use crate::metrics::WeightedSampleSet;
use crate::rng::seeded_rng;

/// Features with binary labels in `{-1, +1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    n_features: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl LabeledDataset {
    /// `features` is row-major `labels.len() x n_features`.
    pub fn new(features: Vec<f64>, n_features: usize, labels: Vec<f64>) -> Result<Self> {
        if features.len() != labels.len() * n_features {
            return Err(Error::Argument(format!(
                "feature matrix has {} entries, expected {} rows x {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(bad) = labels.iter().find(|&&c| c != 1.0 && c != -1.0) {
            return Err(Error::Argument(format!("label {bad} is not in {{-1, +1}}")));
        }
        Ok(Self { n_features, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    fn select(&self, idx: &[usize]) -> Self {
        let mut features = Vec::with_capacity(idx.len() * self.n_features);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self { n_features: self.n_features, features, labels }
    }

    /// Row-wise concatenation.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        check_dim(self.n_features, other.n_features)?;
        let mut features = self.features.clone();
        features.extend_from_slice(&other.features);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Self { n_features: self.n_features, features, labels })
    }

    /// Writes the dataset as headerless CSV: features then the label.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for i in 0..self.len() {
            for v in self.row(i) {
                write!(out, "{v},")?;
            }
            writeln!(out, "{}", self.labels[i] as i64)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads a CSV file whose rows are features followed by one label token.
///
/// Labels `-1`/`1` are taken as is; `0` is mapped to `-1`. Any other token is a
/// parse error carrying the 1-based row number.
pub fn read_dataset(path: &Path, header: bool) -> Result<LabeledDataset> {
    let parse_err = |row: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => parse_err(0, format!("{other:?}")),
        })?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    for (k, record) in reader.records().enumerate() {
        let row = k + 1 + usize::from(header);
        let record = record.map_err(|e| parse_err(row, e.to_string()))?;
        if record.len() < 2 {
            return Err(parse_err(row, "expected at least one feature and a label".into()));
        }
        let p = record.len() - 1;
        match width {
            None => width = Some(p),
            Some(w) if w != p => {
                return Err(parse_err(row, format!("expected {w} features, found {p}")))
            }
            _ => {}
        }
        for tok in record.iter().take(p) {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(row, format!("invalid feature `{tok}`")))?;
            if !v.is_finite() {
                return Err(parse_err(row, format!("non-finite feature `{tok}`")));
            }
            features.push(v);
        }
        let tok = &record[p];
        let label = match tok.parse::<f64>() {
            Ok(v) if v == 1.0 => 1.0,
            Ok(v) if v == -1.0 || v == 0.0 => -1.0,
            _ => return Err(parse_err(row, format!("label `{tok}` is not one of -1, 0, 1"))),
        };
        labels.push(label);
    }
    let width = width.ok_or_else(|| parse_err(0, "no data rows".into()))?;
    LabeledDataset::new(features, width, labels)
}

/// Shuffles the rows with `split_seed` and keeps the first `train_size` for training.
pub fn split_dataset(
    data: &LabeledDataset,
    train_size: usize,
    split_seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if train_size == 0 || train_size >= data.len() {
        return Err(Error::Argument(format!(
            "train size {train_size} must be in [1, {})",
            data.len()
        )));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut seeded_rng(split_seed));
    Ok((data.select(&idx[..train_size]), data.select(&idx[train_size..])))
}

/// [`read_dataset`] followed by [`split_dataset`].
pub fn load_dataset(
    path: &Path,
    train_size: usize,
    split_seed: u64,
    header: bool,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let data = read_dataset(path, header)?;
    split_dataset(&data, train_size, split_seed)
}

/// `log(1 / (1 + e^{-t}))` without overflow.
pub(crate) fn log_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Posterior of `(w, log beta)` under a Gamma(a, rate b) prior on `beta` and
/// `w | beta ~ N(0, beta^{-1} I)`.
#[derive(Clone, Debug)]
pub struct LogisticPosterior {
    data: LabeledDataset,
    a: f64,
    b: f64,
    gamma_const: f64,
}

pub fn logistic_posterior(data: LabeledDataset, a: f64, b: f64) -> Result<LogisticPosterior> {
    if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Argument(format!("prior parameters must be positive, got a={a}, b={b}")));
    }
    if data.is_empty() {
        return Err(Error::Argument("empty training set".into()));
    }
    Ok(LogisticPosterior {
        gamma_const: a * b.ln() - ln_gamma(a),
        data,
        a,
        b,
    })
}

impl LogisticPosterior {
    pub fn dataset(&self) -> &LabeledDataset {
        &self.data
    }

    /// `sum_i log sigma(c_i w^T z_i)`.
    pub fn log_likelihood(&self, w: &[f64]) -> f64 {
        (0..self.data.len())
            .map(|i| {
                let z = self.data.row(i);
                let t: f64 = z.iter().zip(w).map(|(a, b)| a * b).sum();
                log_sigmoid(self.data.label(i) * t)
            })
            .sum()
    }

    /// Log prior density of `(w, s)` including the `log beta` Jacobian.
    pub fn log_prior(&self, w: &[f64], s: f64) -> f64 {
        let p = w.len() as f64;
        let beta = s.exp();
        let gamma = self.gamma_const + (self.a - 1.0) * s - self.b * beta + s;
        let w2: f64 = w.iter().map(|v| v * v).sum();
        let gauss = -0.5 * p * (2.0 * PI).ln() + 0.5 * p * s - 0.5 * beta * w2;
        gamma + gauss
    }
}

impl Target for LogisticPosterior {
    fn dim(&self) -> usize {
        self.data.n_features() + 1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let p = self.data.n_features();
        let (w, s) = (&x[..p], x[p]);
        let v = self.log_likelihood(w) + self.log_prior(w, s);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

/// Self-normalized posterior predictive `P(c = 1 | z)`.
pub fn posterior_predict(particles: &WeightedSampleSet, z: &[f64]) -> Result<f64> {
    check_dim(particles.dim(), z.len() + 1)?;
    let active = ActiveParticles::new(particles)?;
    Ok(active.predict(particles, z))
}

/// Fraction of `test` rows whose thresholded predictive probability matches the
/// label. Probability exactly 1/2 predicts `+1`.
pub fn predictive_accuracy(particles: &WeightedSampleSet, test: &LabeledDataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Argument("empty test set".into()));
    }
    check_dim(particles.dim(), test.n_features() + 1)?;
    let active = ActiveParticles::new(particles)?;
    let correct = (0..test.len())
        .filter(|&i| {
            let p = active.predict(particles, test.row(i));
            let predicted = if p >= 0.5 { 1.0 } else { -1.0 };
            predicted == test.label(i)
        })
        .count();
    Ok(correct as f64 / test.len() as f64)
}

/// Particles whose normalized weights carry all but at most `1e-16` of the mass.
struct ActiveParticles {
    idx: Vec<usize>,
    weights: Vec<f64>,
}

impl ActiveParticles {
    fn new(particles: &WeightedSampleSet) -> Result<Self> {
        let total = particles.total_weight();
        if !(total > 0.0) {
            return Err(Error::DegenerateWeights("all particle weights are zero".into()));
        }
        let cutoff = 1e-16 / particles.len() as f64;
        let mut idx = Vec::new();
        let mut weights = Vec::new();
        for (i, &w) in particles.weights().iter().enumerate() {
            let nw = w / total;
            if nw > cutoff {
                idx.push(i);
                weights.push(nw);
            }
        }
        let kept: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= kept;
        }
        Ok(Self { idx, weights })
    }

    fn predict(&self, particles: &WeightedSampleSet, z: &[f64]) -> f64 {
        let p = z.len();
        let mut acc = 0.0;
        for (&i, &w) in self.idx.iter().zip(&self.weights) {
            let theta = particles.point(i);
            let t: f64 = theta[..p].iter().zip(z).map(|(a, b)| a * b).sum();
            acc += w * sigmoid(t);
        }
        acc.clamp(0.0, 1.0)
    }
}
