//! Sweep execution: one job per (algorithm, eta or AIS level count, seed).
//!
//! Stream splitting: the run with seed index `s`, algorithm code `a` and
//! parameter index `p` (position in `etas` or `ais_levels`) draws from ChaCha
//! stream `s << 32 | a << 16 | p` of the family keyed by `seed`. Sliced
//! Wasserstein directions use the same stream id in the family keyed by
//! `seed ^ PROJECTION_KEY`; reference samples use stream `s` of the family
//! keyed by `seed ^ REFERENCE_KEY`, so every algorithm at a given seed index
//! is scored against the same reference draw.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use midas_core::baselines::{ais_run, AisConfig};
use midas_core::metrics::{sliced_w2, WeightedSampleSet};
use midas_core::samplers::{run_adaptive, validate_schedule, Algorithm, ValidationReport, Verdict};
use midas_core::targets::{
    default_exploration, load_dataset, logistic_posterior, make_toy_target, predictive_accuracy,
    ExplorationDensity, ExplorationFamily, LabeledDataset, LogisticPosterior, Target, ToyTarget,
    ToyTargetSpec,
};
use midas_core::{dump, stream_rng};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{config_err, AlgoChoice, ExperimentSpec};

pub const PROJECTION_KEY: u64 = 0x5157_4f52_4a45_4354;
pub const REFERENCE_KEY: u64 = 0x5245_4645_5245_4e43;

/// Raised when `--strict` meets a failing schedule (exit code 4).
#[derive(Debug)]
pub struct StrictFailure(pub String);

impl std::fmt::Display for StrictFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "schedule validation failed: {}", self.0)
    }
}

impl std::error::Error for StrictFailure {}

pub enum Problem {
    Toy { target: ToyTarget, q0: ExplorationDensity },
    Logistic { posterior: LogisticPosterior, q0: ExplorationDensity, test: LabeledDataset },
}

impl Problem {
    pub fn build(spec: &ExperimentSpec) -> anyhow::Result<Self> {
        if spec.is_logistic() {
            let path = spec.data.as_ref().ok_or_else(|| config_err("data: missing"))?;
            let (train, test) = load_dataset(path, spec.train_size, spec.split_seed, spec.header)?;
            let d = train.n_features() + 1;
            let posterior = logistic_posterior(train, spec.prior_a, spec.prior_b)?;
            let q0 = exploration(spec, d, None)?;
            return Ok(Self::Logistic { posterior, q0, test });
        }
        let name = spec.toy_name().ok_or_else(|| config_err("target: missing"))?;
        let toy = ToyTargetSpec::from_name(name, spec.dim).map_err(|e| config_err(format!("target: {e}")))?;
        let target = make_toy_target(toy)?;
        let q0 = exploration(spec, toy.dim(), Some(toy))?;
        Ok(Self::Toy { target, q0 })
    }

    pub fn target(&self) -> &dyn Target {
        match self {
            Self::Toy { target, .. } => target,
            Self::Logistic { posterior, .. } => posterior,
        }
    }

    pub fn q0(&self) -> &ExplorationDensity {
        match self {
            Self::Toy { q0, .. } | Self::Logistic { q0, .. } => q0,
        }
    }

    pub fn dim(&self) -> usize {
        self.target().dim()
    }

    pub fn metric_name(&self) -> &'static str {
        match self {
            Self::Toy { .. } => "sw2",
            Self::Logistic { .. } => "accuracy",
        }
    }
}

/// Exploration density of the experiment, with optional family and scale overrides.
pub fn exploration(spec: &ExperimentSpec, d: usize, toy: Option<ToyTargetSpec>) -> anyhow::Result<ExplorationDensity> {
    let default = match toy {
        Some(t) => default_exploration(t)?,
        None => ExplorationDensity::isotropic(
            ExplorationFamily::StudentT { dof: spec.q0_dof },
            vec![0.0; d],
            1.0,
        )?,
    };
    if spec.q0_family.is_none() && spec.q0_scale.is_none() {
        return Ok(default);
    }
    let family = match spec.q0_family.as_deref() {
        Some("gaussian") => ExplorationFamily::Gaussian,
        Some("student") => ExplorationFamily::StudentT { dof: spec.q0_dof },
        _ => default.family(),
    };
    let scale = spec.q0_scale.map(|s| vec![s; d]).unwrap_or_else(|| default.scale().to_vec());
    Ok(ExplorationDensity::new(family, default.location().to_vec(), scale)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub algo: AlgoChoice,
    pub eta: Option<f64>,
    pub levels: Option<usize>,
    pub seed_index: usize,
    pub stream: u64,
}

impl Job {
    pub fn algo_label(&self) -> String {
        match (self.algo, self.levels) {
            (AlgoChoice::Adaptive(a), _) => a.to_string(),
            (AlgoChoice::Ais, Some(k)) => format!("ais-K{k}"),
            (AlgoChoice::Ais, None) => "ais".into(),
        }
    }

    pub fn eta_label(&self) -> String {
        self.eta.map(fmt_f64).unwrap_or_default()
    }

    pub fn dir_name(&self) -> String {
        match self.eta {
            Some(eta) => format!("{}-eta{}-seed{}", self.algo_label(), fmt_f64(eta), self.seed_index),
            None => format!("{}-seed{}", self.algo_label(), self.seed_index),
        }
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn enumerate_jobs(spec: &ExperimentSpec) -> anyhow::Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for algo in spec.algorithm_choices()? {
        let (code, params): (u64, Vec<(Option<f64>, Option<usize>)>) = match algo {
            AlgoChoice::Adaptive(Algorithm::Midas) => (0, spec.etas.iter().map(|&e| (Some(e), None)).collect()),
            AlgoChoice::Adaptive(Algorithm::SubMidas) => (1, spec.etas.iter().map(|&e| (Some(e), None)).collect()),
            AlgoChoice::Ais => (2, spec.ais_levels.iter().map(|&k| (None, Some(k))).collect()),
        };
        for (p, (eta, levels)) in params.into_iter().enumerate() {
            for s in 0..spec.seeds {
                jobs.push(Job {
                    algo,
                    eta,
                    levels,
                    seed_index: s,
                    stream: ((s as u64) << 32) | (code << 16) | p as u64,
                });
            }
        }
    }
    Ok(jobs)
}

/// One evaluated checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub budget: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct JobResult {
    pub job: Job,
    pub rows: Vec<MetricRow>,
}

/// Per-η schedule validation for the spec.
pub fn validation_reports(spec: &ExperimentSpec, d: usize) -> Vec<(f64, ValidationReport)> {
    let desc = spec.schedule().descriptor(d);
    spec.etas.iter().map(|&eta| (eta, validate_schedule(&desc, eta, d))).collect()
}

pub fn report_json(eta: f64, d: usize, r: &ValidationReport) -> Value {
    json!({
        "eta": eta,
        "dim": d,
        "verdict": r.verdict.outcome().to_string(),
        "reason": r.verdict.reason(),
        "checks": r.checks.iter().map(|c| json!({
            "name": c.name,
            "outcome": c.outcome.to_string(),
            "detail": c.detail,
        })).collect::<Vec<_>>(),
    })
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn reference_points(spec: &ExperimentSpec, target: &ToyTarget, seed_index: usize) -> anyhow::Result<WeightedSampleSet> {
    let mut rng = stream_rng(spec.seed ^ REFERENCE_KEY, seed_index as u64);
    let pts = target.reference_sample(spec.reference_size, &mut rng)?;
    Ok(WeightedSampleSet::uniform(pts, target.dim())?)
}

fn evaluate(
    problem: &Problem,
    set: &WeightedSampleSet,
    reference: Option<&WeightedSampleSet>,
    n_proj: usize,
    proj_rng: &mut midas_core::SimRng,
) -> anyhow::Result<f64> {
    Ok(match problem {
        Problem::Toy { .. } => sliced_w2(set, reference.expect("toy runs carry a reference"), n_proj, proj_rng)?,
        Problem::Logistic { test, .. } => predictive_accuracy(set, test)?,
    })
}

fn run_job(spec: &ExperimentSpec, problem: &Problem, job: &Job, runs_dir: &Path) -> anyhow::Result<JobResult> {
    let dir = runs_dir.join(job.dir_name());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let kind = spec.weight_kind()?;
    let reference = match problem {
        Problem::Toy { target, .. } => Some(reference_points(spec, target, job.seed_index)?),
        Problem::Logistic { .. } => None,
    };
    let mut rng = stream_rng(spec.seed, job.stream);
    let mut proj_rng = stream_rng(spec.seed ^ PROJECTION_KEY, job.stream);
    let mut manifest = String::new();
    let mut timings = String::new();
    let mut rows = Vec::new();
    let header = json!({
        "kind": "run",
        "version": env!("CARGO_PKG_VERSION"),
        "algorithm": job.algo_label(),
        "eta": job.eta,
        "seed_index": job.seed_index,
        "stream": job.stream,
        "dim": problem.dim(),
        "spec": spec,
    });
    writeln!(manifest, "{header}").unwrap();
    let start = Instant::now();

    match job.algo {
        AlgoChoice::Adaptive(algo) => {
            let config = spec.run_config(algo, job.eta.expect("adaptive jobs carry eta"))?;
            run_adaptive(&config, problem.target(), problem.q0(), &mut rng, |cp, store| {
                let sampled = start.elapsed().as_secs_f64();
                let set = store.to_sample_set(kind)?;
                let value = evaluate(problem, &set, reference.as_ref(), spec.n_proj, &mut proj_rng)
                    .map_err(|e| midas_core::Error::Internal(e.to_string()))?;
                if spec.dump_particles {
                    dump::save_particle_dump(&dir.join(format!("particles_{}.csv", cp.evaluations)), store)?;
                }
                let line = json!({
                    "kind": "checkpoint",
                    "budget": cp.evaluations,
                    "step": cp.step,
                    "particles": store.len(),
                    "final": cp.is_final,
                    problem.metric_name(): value,
                });
                writeln!(manifest, "{line}").unwrap();
                let t = json!({
                    "budget": cp.evaluations,
                    "elapsed_s": start.elapsed().as_secs_f64(),
                    "sampling_s": sampled,
                });
                writeln!(timings, "{t}").unwrap();
                rows.push(MetricRow { budget: cp.evaluations, value });
                Ok(())
            })?;
        }
        AlgoChoice::Ais => {
            let Problem::Toy { target, q0 } = problem else {
                return Err(config_err("algorithms: ais requires a toy target"));
            };
            let config = AisConfig {
                levels: job.levels.expect("ais jobs carry levels"),
                batch: spec.ais_batch,
                n_mh: spec.ais_n_mh,
                beta_min: spec.ais_beta_min,
                proposal_scale: spec.ais_proposal_scale,
            };
            let out = ais_run(&config, target, q0, &mut rng)?;
            let sampled = start.elapsed().as_secs_f64();
            let value = evaluate(problem, &out.samples, reference.as_ref(), spec.n_proj, &mut proj_rng)?;
            if spec.dump_particles {
                dump::save_sample_dump(&dir.join(format!("particles_{}.csv", out.evaluations)), &out.samples)?;
            }
            let line = json!({
                "kind": "ais",
                "levels": config.levels,
                "betas": out.betas,
                "evaluations": out.evaluations,
                "nominal_evaluations": out.nominal_evaluations,
                "acceptance_rates": out.acceptance_rates,
                "budget": out.evaluations,
                "sw2": value,
            });
            writeln!(manifest, "{line}").unwrap();
            let t = json!({"budget": out.evaluations, "elapsed_s": start.elapsed().as_secs_f64(), "sampling_s": sampled});
            writeln!(timings, "{t}").unwrap();
            rows.push(MetricRow { budget: out.evaluations, value });
        }
    }

    let mut csv = match problem {
        Problem::Toy { .. } => String::from("budget,seed,eta,algo,sw2,log_sw2\n"),
        Problem::Logistic { .. } => String::from("budget,seed,eta,algo,accuracy\n"),
    };
    for r in &rows {
        match problem {
            Problem::Toy { .. } => writeln!(
                csv,
                "{},{},{},{},{},{}",
                r.budget,
                job.seed_index,
                job.eta_label(),
                job.algo_label(),
                fmt_f64(r.value),
                fmt_f64(r.value.ln())
            ),
            Problem::Logistic { .. } => writeln!(
                csv,
                "{},{},{},{},{}",
                r.budget,
                job.seed_index,
                job.eta_label(),
                job.algo_label(),
                fmt_f64(r.value)
            ),
        }
        .unwrap();
    }
    write_file(&dir.join("metrics.csv"), &csv)?;
    write_file(&dir.join("manifest.jsonl"), &manifest)?;
    write_file(&dir.join("timings.jsonl"), &timings)?;
    Ok(JobResult { job: job.clone(), rows })
}

/// Mean metric per (algorithm, eta, budget), in first-appearance order.
pub fn aggregate(results: &[JobResult], logistic: bool) -> String {
    let mut keys: Vec<(String, String, usize)> = Vec::new();
    let mut sums: Vec<(f64, f64, usize)> = Vec::new();
    for r in results {
        for row in &r.rows {
            let key = (r.job.algo_label(), r.job.eta_label(), row.budget);
            let idx = match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    keys.push(key);
                    sums.push((0.0, 0.0, 0));
                    keys.len() - 1
                }
            };
            sums[idx].0 += row.value;
            sums[idx].1 += row.value.ln();
            sums[idx].2 += 1;
        }
    }
    let mut out = if logistic {
        String::from("budget,eta,algo,runs,mean_accuracy\n")
    } else {
        String::from("budget,eta,algo,runs,mean_sw2,mean_log_sw2\n")
    };
    for ((algo, eta, budget), (s, sl, n)) in keys.iter().zip(&sums) {
        let n_f = *n as f64;
        if logistic {
            writeln!(out, "{budget},{eta},{algo},{n},{}", fmt_f64(s / n_f)).unwrap();
        } else {
            writeln!(out, "{budget},{eta},{algo},{n},{},{}", fmt_f64(s / n_f), fmt_f64(sl / n_f)).unwrap();
        }
    }
    out
}

#[derive(Debug)]
pub struct ExperimentSummary {
    pub out: PathBuf,
    pub jobs: usize,
    pub aggregate: String,
}

/// Runs every job of the spec and writes the artifact directory.
pub fn run_experiment(spec: &ExperimentSpec, threads: usize) -> anyhow::Result<ExperimentSummary> {
    spec.validate()?;
    let problem = Problem::build(spec)?;
    let d = problem.dim();
    fs::create_dir_all(&spec.out).with_context(|| format!("creating {}", spec.out.display()))?;
    write_file(&spec.out.join("spec.json"), &(serde_json::to_string_pretty(spec)? + "\n"))?;

    let reports = validation_reports(spec, d);
    let validation: Vec<Value> = reports.iter().map(|(eta, r)| report_json(*eta, d, r)).collect();
    write_file(&spec.out.join("validation.json"), &(serde_json::to_string_pretty(&validation)? + "\n"))?;
    if spec.strict {
        if let Some((eta, r)) = reports.iter().find(|(_, r)| matches!(r.verdict, Verdict::Fail(_))) {
            return Err(StrictFailure(format!("eta = {eta}: {}", r.verdict)).into());
        }
    }

    let jobs = enumerate_jobs(spec)?;
    let runs_dir = spec.out.join("runs");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .context("building the worker pool")?;
    let results: Vec<JobResult> = pool.install(|| {
        jobs.par_iter()
            .map(|job| run_job(spec, &problem, job, &runs_dir).with_context(|| format!("run {}", job.dir_name())))
            .collect::<anyhow::Result<Vec<_>>>()
    })?;

    let aggregate = aggregate(&results, problem.metric_name() == "accuracy");
    let mut f = fs::File::create(spec.out.join("aggregate.csv")).context("creating aggregate.csv")?;
    f.write_all(aggregate.as_bytes())?;
    Ok(ExperimentSummary { out: spec.out.clone(), jobs: results.len(), aggregate })
}
