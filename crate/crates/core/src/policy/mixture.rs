use rand::{Rng, RngExt};

use super::store::ParticleStore;
use crate::error::{check_dim, Error, Result};
use crate::kernels::Kernel;
use crate::targets::ExplorationDensity;

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// A sampling distribution that can also be evaluated pointwise.
pub trait Proposal {
    fn dim(&self) -> usize;

    fn density(&self, x: &[f64]) -> f64;

    /// `log q(x)`, accurate where `q(x)` underflows.
    fn log_density(&self, x: &[f64]) -> f64;

    /// Draws one point into `out`. RNG order: mixture coin, component index, kernel draw.
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()>;
}

/// `q(x) = (1 - lambda) sum_i W_i K_{b_i}(x - X_i) / sum_i W_i + lambda q0(x)`.
///
/// With an empty store the policy is `q0`.
#[derive(Clone, Copy, Debug)]
pub struct MixturePolicy<'a> {
    store: &'a ParticleStore,
    q0: &'a ExplorationDensity,
    lambda: f64,
}

impl<'a> MixturePolicy<'a> {
    pub fn new(store: &'a ParticleStore, q0: &'a ExplorationDensity, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Argument(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        check_dim(store.dim(), q0.dim())?;
        Ok(Self { store, q0, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn store(&self) -> &'a ParticleStore {
        self.store
    }

    pub fn q0(&self) -> &'a ExplorationDensity {
        self.q0
    }

    fn is_pure_q0(&self) -> bool {
        self.store.is_empty() || self.lambda == 1.0 || !(self.store.score_total() > 0.0)
    }

    /// Normalized kernel part `sum_i W_i K_{b_i}(x - X_i) / sum_i W_i`.
    pub fn kernel_part(&self, x: &[f64]) -> f64 {
        let total = self.store.score_total();
        if self.store.is_empty() || !(total > 0.0) {
            return 0.0;
        }
        self.store.weighted_kernel_sum(x) / total
    }

    /// Checked density evaluation.
    pub fn policy_density(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.density(x))
    }

    /// Equal-weight mixture over `ell` particles drawn i.i.d. with probability
    /// proportional to their effective weights.
    pub fn subsample<R: Rng + ?Sized>(&self, ell: usize, rng: &mut R) -> Result<SubsampledProposal<'a>> {
        if ell == 0 {
            return Err(Error::Argument("subsample size must be positive".into()));
        }
        let d = self.dim();
        let mut centers = Vec::with_capacity(ell * d);
        let mut inv_bandwidths = Vec::with_capacity(ell);
        for _ in 0..ell {
            let i = self.store.select_particle(rng)?;
            centers.extend_from_slice(self.store.position(i));
            inv_bandwidths.push(1.0 / self.store.bandwidth(i));
        }
        Ok(SubsampledProposal {
            kernel: self.store.kernel().clone(),
            centers,
            inv_bandwidths,
            q0: self.q0,
            lambda: self.lambda,
        })
    }
}

impl Proposal for MixturePolicy<'_> {
    fn dim(&self) -> usize {
        self.store.dim()
    }

    fn density(&self, x: &[f64]) -> f64 {
        if self.is_pure_q0() {
            return self.q0.density(x);
        }
        let mix = self.kernel_part(x);
        if self.lambda == 0.0 {
            mix
        } else {
            (1.0 - self.lambda) * mix + self.lambda * self.q0.density(x)
        }
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        if self.is_pure_q0() {
            return self.q0.log_density(x);
        }
        let log_mix = self.kernel_part(x).ln();
        if self.lambda == 0.0 {
            return log_mix;
        }
        log_add_exp(
            (1.0 - self.lambda).ln() + log_mix,
            self.lambda.ln() + self.q0.log_density(x),
        )
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        check_dim(self.dim(), out.len())?;
        if self.lambda < 1.0 && self.store.is_empty() {
            return Err(Error::DegenerateWeights("kernel part of an empty store".into()));
        }
        let coin: f64 = rng.random();
        if coin < self.lambda {
            self.q0.sample_into(rng, out);
            return Ok(());
        }
        let i = self.store.select_particle(rng)?;
        self.store.kernel().sample_into(rng, out);
        let b = self.store.bandwidth(i);
        for (o, c) in out.iter_mut().zip(self.store.position(i)) {
            *o = c + b * *o;
        }
        Ok(())
    }
}

/// The subsampled proposal `(1 - lambda) (1/ell) sum_k K_{b_k}(x - X_k) + lambda q0(x)`.
#[derive(Clone, Debug)]
pub struct SubsampledProposal<'a> {
    kernel: Kernel,
    centers: Vec<f64>,
    inv_bandwidths: Vec<f64>,
    q0: &'a ExplorationDensity,
    lambda: f64,
}

impl SubsampledProposal<'_> {
    pub fn len(&self) -> usize {
        self.inv_bandwidths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_bandwidths.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn center(&self, k: usize) -> &[f64] {
        let d = self.kernel.dim();
        &self.centers[k * d..(k + 1) * d]
    }

    pub fn bandwidth(&self, k: usize) -> f64 {
        1.0 / self.inv_bandwidths[k]
    }

    pub fn kernel_part(&self, x: &[f64]) -> f64 {
        let d = self.kernel.dim();
        let acc: f64 = self
            .centers
            .chunks_exact(d)
            .zip(&self.inv_bandwidths)
            .map(|(c, &ib)| self.kernel.eval_scaled(x, c, ib))
            .sum();
        acc / self.len() as f64
    }
}

impl Proposal for SubsampledProposal<'_> {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn density(&self, x: &[f64]) -> f64 {
        if self.lambda == 1.0 {
            return self.q0.density(x);
        }
        (1.0 - self.lambda) * self.kernel_part(x) + self.lambda * self.q0.density(x)
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        if self.lambda == 1.0 {
            return self.q0.log_density(x);
        }
        let log_mix = self.kernel_part(x).ln();
        if self.lambda == 0.0 {
            return log_mix;
        }
        log_add_exp(
            (1.0 - self.lambda).ln() + log_mix,
            self.lambda.ln() + self.q0.log_density(x),
        )
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        check_dim(self.dim(), out.len())?;
        let coin: f64 = rng.random();
        if coin < self.lambda {
            self.q0.sample_into(rng, out);
            return Ok(());
        }
        let k = rng.random_range(0..self.len());
        self.kernel.sample_into(rng, out);
        let b = self.bandwidth(k);
        for (o, c) in out.iter_mut().zip(self.center(k)) {
            *o = c + b * *o;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;
    use crate::rng::seeded_rng;
    use crate::targets::ExplorationFamily;

    fn q0_1d() -> ExplorationDensity {
        ExplorationDensity::isotropic(ExplorationFamily::StudentT { dof: 3.0 }, vec![0.0], 2.0).unwrap()
    }

    fn store_1d(points: &[(f64, f64)]) -> ParticleStore {
        let mut s = ParticleStore::new(Kernel::gaussian(1).unwrap(), 1.0).unwrap();
        for (k, &(x, w)) in points.iter().enumerate() {
            s.insert_particle(&[x], w, 1.0 / (k as f64 + 2.0), 0.5).unwrap();
        }
        s
    }

    #[test]
    fn lambda_one_is_q0() {
        let q0 = q0_1d();
        let s = store_1d(&[(1.0, 1.0), (2.0, 3.0)]);
        let p = MixturePolicy::new(&s, &q0, 1.0).unwrap();
        for x in [-3.0, 0.0, 0.7, 5.0] {
            assert_eq!(p.density(&[x]), q0.density(&[x]));
        }
    }

    #[test]
    fn lambda_zero_single_particle_is_kernel() {
        let q0 = q0_1d();
        let s = store_1d(&[(1.0, 4.0)]);
        let p = MixturePolicy::new(&s, &q0, 0.0).unwrap();
        let k = Kernel::gaussian(1).unwrap();
        for x in [-1.0, 1.0, 1.3] {
            let expected = k.scaled_density(0.5, &[x], &[1.0]).unwrap();
            assert!((p.density(&[x]) - expected).abs() < 1e-15 * expected.max(1.0));
            assert!((p.log_density(&[x]) - expected.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_bound_by_exploration() {
        let q0 = q0_1d();
        let s = store_1d(&[(0.0, 1.0), (3.0, 0.1), (-2.0, 7.0)]);
        let p = MixturePolicy::new(&s, &q0, 0.3).unwrap();
        for i in -50..50 {
            let x = [i as f64 * 0.2];
            assert!(p.density(&x) >= 0.3 * q0.density(&x));
        }
    }

    #[test]
    fn empty_store_requires_lambda_one_to_sample() {
        let q0 = q0_1d();
        let s = ParticleStore::new(Kernel::gaussian(1).unwrap(), 1.0).unwrap();
        let p = MixturePolicy::new(&s, &q0, 0.0).unwrap();
        let mut out = [0.0];
        let mut rng = seeded_rng(1);
        // the coin never selects q0 when lambda is 0
        assert!(matches!(p.sample_into(&mut rng, &mut out), Err(Error::DegenerateWeights(_))));
        assert_eq!(p.density(&[0.3]), q0.density(&[0.3]));
    }

    #[test]
    fn single_particle_subsample_matches_policy() {
        let q0 = q0_1d();
        let s = store_1d(&[(1.5, 2.0)]);
        let p = MixturePolicy::new(&s, &q0, 0.25).unwrap();
        let mut rng = seeded_rng(3);
        let sub = p.subsample(4, &mut rng).unwrap();
        for x in [-1.0, 1.5, 2.0] {
            let a = p.density(&[x]);
            let b = sub.density(&[x]);
            assert!((a - b).abs() < 1e-14 * a);
        }
    }

    #[test]
    fn log_density_survives_underflow() {
        let q0 = ExplorationDensity::isotropic(ExplorationFamily::Gaussian, vec![0.0], 1.0).unwrap();
        let s = store_1d(&[(0.0, 1.0)]);
        let p = MixturePolicy::new(&s, &q0, 0.5).unwrap();
        let lq = p.log_density(&[60.0]);
        assert!(lq.is_finite());
        assert!((lq - (0.5f64.ln() + q0.log_density(&[60.0]))).abs() < 1e-9);
    }
}
