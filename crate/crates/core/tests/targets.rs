use std::f64::consts::PI;

use midas_core::targets::{
    default_exploration, load_dataset, logistic_posterior, make_toy_target, posterior_predict, predictive_accuracy,
    read_dataset, split_dataset, waveform, ExplorationFamily, LabeledDataset, ScaledTarget, Target, ToyTargetSpec,
};
use midas_core::{seeded_rng, Error, ExplorationDensity, WeightedSampleSet};
use statrs::distribution::{Continuous, ContinuousCDF, Gamma, Normal, StudentsT};

#[test]
fn toy_parameters() {
    let cold = make_toy_target(ToyTargetSpec::ColdStart(4)).unwrap();
    assert_eq!(cold.components()[0].mean, vec![2.5; 4]);
    assert!(cold.components()[0].var.iter().all(|&v| (v - 0.04).abs() < 1e-15));

    let mix = make_toy_target(ToyTargetSpec::GaussianMixture(1)).unwrap();
    let modes: Vec<f64> = mix.components().iter().map(|c| c.mean[0]).collect();
    assert_eq!(modes, vec![0.5, -0.5]);
    assert_eq!(mix.weights(), &[0.5, 0.5]);

    let aniso = make_toy_target(ToyTargetSpec::AnisotropicMixture(2)).unwrap();
    for c in aniso.components() {
        assert!((c.var[0] - 0.8).abs() < 1e-12);
        assert!((c.var[1] - 0.08).abs() < 1e-12);
    }
    assert!(ToyTargetSpec::from_name("fourmodes", 3).is_err());
    assert!(ToyTargetSpec::from_name("nope", 2).is_err());
}

#[test]
fn cold_start_is_unnormalized_with_zero_peak() {
    let t = make_toy_target(ToyTargetSpec::ColdStart(2)).unwrap();
    let mu = 5.0 / 2f64.sqrt();
    assert_eq!(t.log_unnorm_density(&[mu, mu]).unwrap(), 0.0);
    // normalizer of N(mu, 0.08 I_2)
    let z = (2.0 * PI * 0.08f64).ln();
    assert!((t.log_normalizer().unwrap() - z).abs() < 1e-12);
    assert!((t.density(&[mu, mu]) - 1.0 / (2.0 * PI * 0.08)).abs() < 1e-10);
    assert!(matches!(t.log_unnorm_density(&[0.0]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn four_modes_density_at_a_mode() {
    let t = make_toy_target(ToyTargetSpec::FourModes2D).unwrap();
    let own = 0.25 / (2.0 * PI * 0.1);
    let f = t.log_unnorm_density(&[0.0, 0.0]).unwrap().exp();
    assert!((f - own).abs() < 1e-14 * own);
    // the nearest other mode contributes exp(-100 / 0.2) relative to the peak
    assert!((-100.0f64 / 0.2).exp() < 1e-100);
    assert_eq!(t.log_normalizer(), Some(0.0));
}

#[test]
fn mixture_density_matches_components() {
    let t = make_toy_target(ToyTargetSpec::GaussianMixture(1)).unwrap();
    let n = Normal::new(0.5, 0.4).unwrap();
    let m = Normal::new(-0.5, 0.4).unwrap();
    for x in [-2.0, -0.5, 0.0, 0.3, 1.7] {
        let want = 0.5 * n.pdf(x) + 0.5 * m.pdf(x);
        assert!((t.density(&[x]) - want).abs() < 1e-13);
    }
}

#[test]
fn reference_samplers() {
    let mut rng = seeded_rng(21);
    let m = 100_000;

    let cold = make_toy_target(ToyTargetSpec::ColdStart(2)).unwrap();
    let pts = cold.reference_sample(m, &mut rng).unwrap();
    for j in 0..2 {
        let mean = pts.iter().skip(j).step_by(2).sum::<f64>() / m as f64;
        assert!((mean - 5.0 / 2f64.sqrt()).abs() < 0.01);
    }

    let mix = make_toy_target(ToyTargetSpec::GaussianMixture(1)).unwrap();
    let pts = mix.reference_sample(m, &mut rng).unwrap();
    let frac = pts.iter().filter(|&&x| x > 0.0).count() as f64 / m as f64;
    assert!((frac - 0.5).abs() < 0.01);

    let four = make_toy_target(ToyTargetSpec::FourModes2D).unwrap();
    let pts = four.reference_sample(m, &mut rng).unwrap();
    let mut counts = [0usize; 4];
    for p in pts.chunks_exact(2) {
        counts[four.nearest_component(p)] += 1;
    }
    for c in counts {
        assert!((c as f64 / m as f64 - 0.25).abs() < 0.01);
    }
}

#[test]
fn scaled_target_shifts_log_density() {
    let t = make_toy_target(ToyTargetSpec::GaussianMixture(2)).unwrap();
    let s = ScaledTarget::new(t.clone(), 1000.0).unwrap();
    let x = [0.1, -0.3];
    assert!((s.log_density(&x) - t.log_density(&x) - 1000f64.ln()).abs() < 1e-12);
    assert!(ScaledTarget::new(t, 0.0).is_err());
}

#[test]
fn exploration_densities_match_statrs() {
    let g = ExplorationDensity::gaussian(vec![1.0, -2.0], vec![4.0, 0.25]).unwrap();
    let (n0, n1) = (Normal::new(1.0, 2.0).unwrap(), Normal::new(-2.0, 0.5).unwrap());
    for x in [[0.0, 0.0], [3.0, -2.1], [-5.0, 1.0]] {
        let want = n0.ln_pdf(x[0]) + n1.ln_pdf(x[1]);
        assert!((g.log_density(&x) - want).abs() < 1e-12);
    }
    let t = ExplorationDensity::student_t(vec![0.5], vec![9.0], 3.0).unwrap();
    let st = StudentsT::new(0.5, 3.0, 3.0).unwrap();
    for x in [-40.0, -1.0, 0.5, 2.0, 100.0] {
        assert!((t.log_density(&[x]) - st.ln_pdf(x)).abs() < 1e-12);
    }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn exploration_samplers_pass_ks() {
    let n = 100_000;
    // 1% critical value of the KS statistic
    let crit = 1.63 / (n as f64).sqrt();
    let mut rng = seeded_rng(5);
    let t = ExplorationDensity::isotropic(ExplorationFamily::StudentT { dof: 3.0 }, vec![5.0], 10.0).unwrap();
    let st = StudentsT::new(5.0, 10f64.sqrt(), 3.0).unwrap();
    let xs: Vec<f64> = (0..n).map(|_| t.sample(&mut rng)[0]).collect();
    assert!(ks_statistic(xs, |x| st.cdf(x)) < crit);

    let g = ExplorationDensity::isotropic(ExplorationFamily::Gaussian, vec![0.0], 5.0).unwrap();
    let nd = Normal::new(0.0, 5f64.sqrt()).unwrap();
    let xs: Vec<f64> = (0..n).map(|_| g.sample(&mut rng)[0]).collect();
    assert!(ks_statistic(xs, |x| nd.cdf(x)) < crit);
}

#[test]
fn default_explorations() {
    let q = default_exploration(ToyTargetSpec::ColdStart(4)).unwrap();
    assert_eq!(q.family(), ExplorationFamily::Gaussian);
    assert_eq!(q.scale(), &[1.25; 4]);
    let q = default_exploration(ToyTargetSpec::FourModes2D).unwrap();
    assert_eq!(q.location(), &[5.0, 5.0]);
}

fn toy_dataset() -> LabeledDataset {
    // separable by the first coordinate
    let features = vec![2.0, 0.3, 1.0, -0.7, -1.5, 0.2, -0.4, 1.1];
    LabeledDataset::new(features, 2, vec![1.0, 1.0, -1.0, -1.0]).unwrap()
}

#[test]
fn logistic_density_terms() {
    let data = toy_dataset();
    let post = logistic_posterior(data.clone(), 1.0, 0.01).unwrap();
    assert_eq!(post.dim(), 3);
    assert!((post.log_likelihood(&[0.0, 0.0]) + 4.0 * 2f64.ln()).abs() < 1e-14);

    let gamma = Gamma::new(1.0, 0.01).unwrap();
    let gauss = Normal::new(0.0, 1.0).unwrap();
    let prior = gamma.ln_pdf(1.0) + 2.0 * gauss.ln_pdf(0.0);
    assert!((post.log_prior(&[0.0, 0.0], 0.0) - prior).abs() < 1e-12);
    let full = post.log_unnorm_density(&[0.0, 0.0, 0.0]).unwrap();
    assert!((full - prior + 4.0 * 2f64.ln()).abs() < 1e-12);

    // prior at s = log 4: Gamma density at 4 times the Jacobian 4, Gaussian with variance 1/4
    let s = 4f64.ln();
    let w = [0.3, -0.2];
    let g = Normal::new(0.0, 0.5).unwrap();
    let want = gamma.ln_pdf(4.0) + s + g.ln_pdf(w[0]) + g.ln_pdf(w[1]);
    assert!((post.log_prior(&w, s) - want).abs() < 1e-12);

    let doubled = logistic_posterior(data.concat(&data).unwrap(), 1.0, 0.01).unwrap();
    let w = [0.7, -1.3];
    assert!((doubled.log_likelihood(&w) - 2.0 * post.log_likelihood(&w)).abs() < 1e-12);
    assert!(post.log_density(&[1e3, -1e3, 50.0]).is_finite());
}

#[test]
fn predictive_rules() {
    let z = [0.4, -1.0];
    // all particles orthogonal to z predict 1/2
    let flat = WeightedSampleSet::new(vec![1.0, 0.4, 0.0, -2.5, -1.0, 9.0], 3, vec![1.0, 3.0]).unwrap();
    assert!((posterior_predict(&flat, &z).unwrap() - 0.5).abs() < 1e-15);

    let sigmoid = |t: f64| 1.0 / (1.0 + (-t).exp());
    let one = WeightedSampleSet::new(vec![1.0, 2.0, 0.0], 3, vec![5.0]).unwrap();
    assert!((posterior_predict(&one, &z).unwrap() - sigmoid(0.4 - 2.0)).abs() < 1e-15);

    let two = WeightedSampleSet::new(vec![1.0, 2.0, 0.0, -3.0, 0.5, 0.0], 3, vec![1.0, 1.0]).unwrap();
    let want = 0.5 * (sigmoid(0.4 - 2.0) + sigmoid(-1.2 - 0.5));
    assert!((posterior_predict(&two, &z).unwrap() - want).abs() < 1e-15);

    let zero = WeightedSampleSet::from_parts_unchecked(vec![1.0, 2.0, 0.0], 3, vec![0.0]);
    assert!(matches!(posterior_predict(&zero, &z), Err(Error::DegenerateWeights(_))));
}

#[test]
fn accuracy_rules() {
    let data = toy_dataset();
    let separator = WeightedSampleSet::uniform(vec![10.0, 0.0, 0.0], 3).unwrap();
    assert_eq!(predictive_accuracy(&separator, &data).unwrap(), 1.0);
    // constant 1/2 predicts +1 everywhere: the base rate
    let null = WeightedSampleSet::uniform(vec![0.0, 0.0, 0.0], 3).unwrap();
    assert_eq!(predictive_accuracy(&null, &data).unwrap(), 0.5);

    let mut rng = seeded_rng(9);
    let random = waveform::generate(4_000, 3);
    let labels: Vec<f64> = (0..random.len())
        .map(|_| if rand::RngExt::random::<bool>(&mut rng) { 1.0 } else { -1.0 })
        .collect();
    let shuffled = LabeledDataset::new(
        (0..random.len()).flat_map(|i| random.row(i).to_vec()).collect(),
        random.n_features(),
        labels,
    )
    .unwrap();
    let pts: Vec<f64> = (0..50 * 22).map(|_| rand::RngExt::random::<f64>(&mut rng) - 0.5).collect();
    let particles = WeightedSampleSet::uniform(pts, 22).unwrap();
    let acc = predictive_accuracy(&particles, &shuffled).unwrap();
    assert!((acc - 0.5).abs() < 0.05, "{acc}");
}

#[test]
fn waveform_generation() {
    let a = waveform::generate(waveform::STANDARD_SIZE, 0);
    assert_eq!(a.len(), 5000);
    assert_eq!(a.n_features(), 21);
    let b = waveform::generate(waveform::STANDARD_SIZE, 0);
    assert_eq!(a, b);
    for j in 0..21 {
        let col: Vec<f64> = (0..a.len()).map(|i| a.row(i)[j]).collect();
        let m = col.iter().sum::<f64>() / col.len() as f64;
        assert!(m.abs() < 1e-12);
    }
    let pos = a.labels().iter().filter(|&&c| c == 1.0).count() as f64 / a.len() as f64;
    assert!((pos - 1.0 / 3.0).abs() < 0.03);
}

#[test]
fn dataset_round_trip_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wave.csv");
    let data = waveform::generate(waveform::STANDARD_SIZE, 1);
    data.write_csv(&path).unwrap();
    assert_eq!(read_dataset(&path, false).unwrap(), data);

    let (train, test) = load_dataset(&path, 400, 7, false).unwrap();
    assert_eq!((train.len(), test.len()), (400, 4600));
    let (train2, test2) = load_dataset(&path, 400, 7, false).unwrap();
    assert_eq!(train, train2);
    assert_eq!(test, test2);
    let (other, _) = split_dataset(&data, 400, 8).unwrap();
    assert_ne!(other, train2);
    assert!(matches!(split_dataset(&data, 5000, 0), Err(Error::Argument(_))));
}

#[test]
fn dataset_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b,label\n0.1,0.2,1\n0.3,0.4,0\n0.5,0.6,2\n").unwrap();
    match read_dataset(&path, true) {
        Err(Error::Parse { row, .. }) => assert_eq!(row, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
    std::fs::write(&path, "0.1,0.2,1\n0.3,x,-1\n").unwrap();
    assert!(matches!(read_dataset(&path, false), Err(Error::Parse { row: 2, .. })));
    std::fs::write(&path, "0.1,0.2,1\n0.3,-1\n").unwrap();
    assert!(matches!(read_dataset(&path, false), Err(Error::Parse { row: 2, .. })));
    let ok = {
        std::fs::write(&path, "0.1,0.2,1\n0.3,0.4,0\n").unwrap();
        read_dataset(&path, false).unwrap()
    };
    assert_eq!(ok.labels(), &[1.0, -1.0]);
    assert!(matches!(read_dataset(&dir.path().join("missing.csv"), false), Err(Error::Io(_))));
}

#[test]
fn logistic_has_no_reference_sampler() {
    let post = logistic_posterior(toy_dataset(), 1.0, 0.01).unwrap();
    assert!(matches!(post.reference_sample(3, &mut seeded_rng(0)), Err(Error::Unsupported(_))));
}
