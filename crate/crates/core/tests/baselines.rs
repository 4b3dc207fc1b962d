use midas_core::baselines::{ais_run, geometric_schedule, rw_metropolis_step, AisConfig};
use midas_core::metrics::{effective_sample_size, self_normalized_estimate};
use midas_core::targets::{default_exploration, make_toy_target, ExplorationFamily, ScaledTarget, Target, ToyTargetSpec};
use midas_core::{seeded_rng, stream_rng, Error, ExplorationDensity};

struct Density(ExplorationDensity);

impl Target for Density {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        self.0.log_density(x)
    }
}

fn gaussian(mean: f64, var: f64) -> ExplorationDensity {
    ExplorationDensity::gaussian(vec![mean], vec![var]).unwrap()
}

#[test]
fn tempering_schedule() {
    assert_eq!(geometric_schedule(1, 0.3).unwrap(), vec![0.3, 1.0]);
    let b = geometric_schedule(2, 1e-4).unwrap();
    assert!((b[0] - 1e-4).abs() < 1e-18);
    assert!((b[1] - 1e-2).abs() < 1e-15);
    assert_eq!(b[2], 1.0);
    let b = geometric_schedule(30, 1e-4).unwrap();
    assert!(b.windows(2).all(|w| w[0] < w[1]));
    assert!(matches!(geometric_schedule(5, 0.0), Err(Error::Argument(_))));
    assert!(matches!(geometric_schedule(5, 1.0), Err(Error::Argument(_))));
}

#[test]
fn metropolis_flat_and_forbidden() {
    let mut rng = seeded_rng(1);
    let mut x = [0.5];
    let mut lp = 0.0;
    assert!((0..1000).all(|_| rw_metropolis_step(|_| 0.0, &mut x, &mut lp, 3.0, &mut rng)));
    let start = x;
    let mut lp = 0.0;
    assert!((0..1000).all(|_| !rw_metropolis_step(|_| f64::NEG_INFINITY, &mut x, &mut lp, 3.0, &mut rng)));
    assert_eq!(x, start);
}

#[test]
fn metropolis_acceptance_on_a_standard_normal() {
    let mut rng = seeded_rng(2);
    let log_phi = |y: &[f64]| -0.5 * y[0] * y[0];
    let mut x = [0.0];
    let mut lp = 0.0;
    let n = 100_000;
    let accepted = (0..n).filter(|_| rw_metropolis_step(log_phi, &mut x, &mut lp, 2.4, &mut rng)).count();
    let rate = accepted as f64 / n as f64;
    assert!((rate - 0.44).abs() < 0.05, "{rate}");
}

#[test]
fn metropolis_consumes_a_fixed_number_of_draws() {
    // accepted and rejected moves leave the generator in the same state
    let mut a = seeded_rng(3);
    let mut b = seeded_rng(3);
    let (mut x, mut y) = ([0.0], [0.0]);
    let (mut lx, mut ly) = (0.0, 0.0);
    rw_metropolis_step(|_| 0.0, &mut x, &mut lx, 1.0, &mut a);
    rw_metropolis_step(|_| f64::NEG_INFINITY, &mut y, &mut ly, 1.0, &mut b);
    assert_eq!(rand::RngExt::random::<u64>(&mut a), rand::RngExt::random::<u64>(&mut b));
}

#[test]
fn single_level_without_moves_is_tempered_importance_sampling() {
    let q0 = gaussian(0.0, 4.0);
    let target = Density(gaussian(1.0, 1.0));
    let config = AisConfig { levels: 1, batch: 50, n_mh: 0, beta_min: 0.01, proposal_scale: None };
    let out = ais_run(&config, &target, &q0, &mut seeded_rng(4)).unwrap();
    for i in 0..50 {
        let x = out.samples.point(i);
        let want = 0.99 * (target.log_density(x) - q0.log_density(x));
        assert!((out.log_weights[i] - want).abs() < 1e-12);
    }
    assert_eq!(out.evaluations, 50);
    assert_eq!(out.nominal_evaluations, 0);
}

#[test]
fn exact_target_gives_flat_weights() {
    let q0 = ExplorationDensity::isotropic(ExplorationFamily::StudentT { dof: 3.0 }, vec![1.0, 2.0], 2.0).unwrap();
    let target = Density(q0.clone());
    let config = AisConfig { levels: 4, batch: 40, n_mh: 3, ..AisConfig::default() };
    let out = ais_run(&config, &target, &q0, &mut seeded_rng(5)).unwrap();
    assert!(out.log_weights.iter().all(|l| l.abs() < 1e-12));
    assert_eq!(out.evaluations, 40 * 4 * 4);
    assert_eq!(out.nominal_evaluations, 40 * 4 * 3);
    assert_eq!(out.acceptance_rates.len(), 4);
}

#[test]
fn scaling_the_target_shifts_every_log_weight() {
    let spec = ToyTargetSpec::ColdStart(2);
    let target = make_toy_target(spec).unwrap();
    let scaled = ScaledTarget::new(target.clone(), 50.0).unwrap();
    let q0 = default_exploration(spec).unwrap();
    let config = AisConfig { levels: 5, batch: 30, n_mh: 4, ..AisConfig::default() };
    let a = ais_run(&config, &target, &q0, &mut stream_rng(6, 0)).unwrap();
    let b = ais_run(&config, &scaled, &q0, &mut stream_rng(6, 0)).unwrap();
    for (x, y) in a.log_weights.iter().zip(&b.log_weights) {
        // the first level carries beta_min of the constant into the proposal
        assert!((y - x - (1.0 - config.beta_min) * 50f64.ln()).abs() < 1e-9);
    }
    let h = |x: &[f64]| x[0];
    let (ea, eb) = (self_normalized_estimate(&a.samples, h).unwrap(), self_normalized_estimate(&b.samples, h).unwrap());
    assert!((ea - eb).abs() < 1e-9);
}

#[test]
fn many_levels_without_moves_is_consistent() {
    let q0 = gaussian(0.0, 4.0);
    let target = Density(gaussian(1.0, 1.0));
    let config = AisConfig { levels: 200, batch: 10_000, n_mh: 0, ..AisConfig::default() };
    let out = ais_run(&config, &target, &q0, &mut seeded_rng(7)).unwrap();
    let mu = self_normalized_estimate(&out.samples, |x| x[0]).unwrap();
    let w = out.samples.normalized_weights().unwrap();
    let se = w
        .iter()
        .enumerate()
        .map(|(i, wi)| (wi * (out.samples.point(i)[0] - mu)).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!((mu - 1.0).abs() < 3.0 * se, "{mu} +- {se}");
}

#[test]
fn more_levels_give_a_larger_effective_sample() {
    let spec = ToyTargetSpec::ColdStart(1);
    let target = make_toy_target(spec).unwrap();
    let q0 = default_exploration(spec).unwrap();
    let mean_ess = |levels: usize| {
        let config = AisConfig { levels, batch: 300, ..AisConfig::default() };
        (0..20)
            .map(|s| {
                let out = ais_run(&config, &target, &q0, &mut stream_rng(8, s)).unwrap();
                effective_sample_size(out.samples.weights())
            })
            .sum::<f64>()
            / 20.0
    };
    let (few, many) = (mean_ess(2), mean_ess(30));
    assert!(many > few, "ESS {few} (K=2) vs {many} (K=30)");
}

#[test]
fn configuration_checks() {
    let q0 = gaussian(0.0, 1.0);
    let target = Density(q0.clone());
    for bad in [
        AisConfig { levels: 0, ..AisConfig::default() },
        AisConfig { batch: 0, ..AisConfig::default() },
        AisConfig { beta_min: 1.5, ..AisConfig::default() },
        AisConfig { proposal_scale: Some(-1.0), ..AisConfig::default() },
    ] {
        assert!(matches!(ais_run(&bad, &target, &q0, &mut seeded_rng(0)), Err(Error::Argument(_))));
    }
    let config = AisConfig::default();
    assert_eq!(config.evaluations(), 300 * 10 * 21);
    assert_eq!(config.nominal_evaluations(), 300 * 10 * 20);
    assert!((config.scale_for(4) - 0.25).abs() < 1e-15);
}
