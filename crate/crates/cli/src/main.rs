//! `midas`: adaptive importance sampling experiments from the command line.

mod config;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use midas_core::metrics::{sliced_w2, WeightedSampleSet};
use midas_core::targets::{load_dataset, make_toy_target, predictive_accuracy, waveform, Target, ToyTargetSpec};
use midas_core::{dump, stream_rng, WeightKind};
use serde_json::{json, Map, Value};

use config::{config_err, parse_assignment, read_config_file, resolve, ConfigError, ExperimentSpec};
use experiment::{report_json, run_experiment, validation_reports, StrictFailure};

#[derive(Parser)]
#[command(name = "midas", version, about = "Adaptive importance sampling by stochastic mirror descent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// A single run (one algorithm, one eta, one seed) with particle dumps at each checkpoint.
    Run(SpecArgs),
    /// Every (algorithm, eta, seed) combination, with an aggregate table.
    Sweep(SpecArgs),
    /// Sliced Wasserstein distance between a particle dump and a toy target.
    Eval(EvalArgs),
    /// Check the schedule against the convergence conditions.
    ValidateSchedule(SpecArgs),
    /// Posterior predictive accuracy of a logistic-regression particle dump.
    Predict(PredictArgs),
    /// Write a binarized, standardized waveform dataset as CSV.
    MakeWaveform(WaveformArgs),
}

#[derive(Args, Clone, Default)]
struct SpecArgs {
    /// Flat JSON configuration file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    /// Toy target for the custom experiment.
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated algorithms: midas, submidas, ais.
    #[arg(long = "algo", value_delimiter = ',')]
    algo: Vec<String>,
    /// Comma-separated learning rates in (0, 1].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eta: Vec<f64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of runs per configuration.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// The dataset has a header line.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 4 when the schedule fails validation.
    #[arg(long)]
    strict: bool,
    /// Any other configuration key, as KEY=VALUE (VALUE is parsed as JSON when possible).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl SpecArgs {
    fn overrides(&self) -> anyhow::Result<Vec<(String, Value)>> {
        let mut o: Vec<(String, Value)> = Vec::new();
        let mut put = |k: &str, v: Value| o.push((k.to_string(), v));
        if let Some(v) = &self.experiment {
            put("experiment", json!(v));
        }
        if let Some(v) = &self.target {
            put("target", json!(v));
        }
        if let Some(v) = self.dim {
            put("dim", json!(v));
        }
        if !self.algo.is_empty() {
            put("algorithms", json!(self.algo));
        }
        if !self.eta.is_empty() {
            put("etas", json!(self.eta));
        }
        if let Some(v) = self.budget {
            put("budget", json!(v));
        }
        if let Some(v) = self.batch {
            put("batch", json!(v));
        }
        if let Some(v) = self.seed {
            put("seed", json!(v));
        }
        if let Some(v) = self.seeds {
            put("seeds", json!(v));
        }
        if let Some(v) = self.checkpoint_every {
            put("checkpoint_every", json!(v));
        }
        if let Some(v) = &self.data {
            put("data", json!(v));
        }
        if self.header {
            put("header", json!(true));
        }
        if let Some(v) = &self.out {
            put("out", json!(v));
        }
        if self.strict {
            put("strict", json!(true));
        }
        for s in &self.set {
            o.push(parse_assignment(s)?);
        }
        Ok(o)
    }

    fn resolve(&self) -> anyhow::Result<ExperimentSpec> {
        let base = match &self.config {
            Some(p) => read_config_file(p)?,
            None => Map::new(),
        };
        resolve(base, self.overrides()?)
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dump: PathBuf,
    /// Toy target name.
    #[arg(long)]
    target: String,
    #[arg(long)]
    dim: usize,
    /// raw or effective.
    #[arg(long, default_value = "raw")]
    weights: String,
    #[arg(long, default_value_t = midas_core::metrics::DEFAULT_PROJECTIONS)]
    n_proj: usize,
    #[arg(long, default_value_t = 10_000)]
    reference_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    dump: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 400)]
    train_size: usize,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    #[arg(long, default_value = "raw")]
    weights: String,
}

#[derive(Args)]
struct WaveformArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = waveform::STANDARD_SIZE)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn weight_kind(s: &str) -> anyhow::Result<WeightKind> {
    s.parse().map_err(|e| config_err(format!("weights: {e}")))
}

fn cmd_run(args: &SpecArgs, single: bool) -> anyhow::Result<()> {
    let mut spec = args.resolve()?;
    if single {
        if spec.algorithms.len() != 1 || spec.etas.len() != 1 || spec.seeds != 1 {
            return Err(config_err("run takes exactly one algorithm, one eta and one seed; use sweep"));
        }
        spec.dump_particles = true;
    }
    let summary = run_experiment(&spec, args.jobs)?;
    eprintln!("{} run(s) written to {}", summary.jobs, summary.out.display());
    print!("{}", summary.aggregate);
    Ok(())
}

fn cmd_validate(args: &SpecArgs) -> anyhow::Result<()> {
    let spec = args.resolve()?;
    let d = spec.dim;
    let reports = validation_reports(&spec, d);
    let out: Vec<Value> = reports.iter().map(|(eta, r)| report_json(*eta, d, r)).collect();
    println!("{}", serde_json::to_string_pretty(&out)?);
    if spec.strict {
        if let Some((eta, r)) = reports.iter().find(|(_, r)| r.verdict.outcome() == midas_core::samplers::Outcome::Fail) {
            return Err(StrictFailure(format!("eta = {eta}: {}", r.verdict)).into());
        }
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> anyhow::Result<()> {
    let spec = ToyTargetSpec::from_name(&args.target, args.dim).map_err(|e| config_err(e.to_string()))?;
    let target = make_toy_target(spec)?;
    let particles = dump::read_particle_dump(&args.dump)?.to_sample_set(weight_kind(&args.weights)?)?;
    if particles.dim() != target.dim() {
        return Err(config_err(format!(
            "dump has dimension {}, target has {}",
            particles.dim(),
            target.dim()
        )));
    }
    let mut rng = stream_rng(args.seed ^ experiment::REFERENCE_KEY, 0);
    let reference = WeightedSampleSet::uniform(target.reference_sample(args.reference_size, &mut rng)?, target.dim())?;
    let mut proj = stream_rng(args.seed ^ experiment::PROJECTION_KEY, 0);
    let sw2 = sliced_w2(&particles, &reference, args.n_proj, &mut proj)?;
    println!("sw2,log_sw2\n{sw2:?},{:?}", sw2.ln());
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> anyhow::Result<()> {
    let (train, test) = load_dataset(&args.data, args.train_size, args.split_seed, args.header)?;
    let particles = dump::read_particle_dump(&args.dump)?.to_sample_set(weight_kind(&args.weights)?)?;
    if particles.dim() != train.n_features() + 1 {
        return Err(config_err(format!(
            "dump has dimension {}, the model needs {}",
            particles.dim(),
            train.n_features() + 1
        )));
    }
    let acc = predictive_accuracy(&particles, &test)?;
    println!("test_rows,accuracy\n{},{acc:?}", test.len());
    Ok(())
}

fn cmd_waveform(args: &WaveformArgs) -> anyhow::Result<()> {
    if args.n < 2 {
        return Err(config_err("n: need at least two rows"));
    }
    let data = waveform::generate(args.n, args.seed);
    data.write_csv(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!("wrote {} rows to {}", data.len(), args.out.display());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<StrictFailure>().is_some() {
            return 4;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<midas_core::Error>() {
            return match e {
                midas_core::Error::Io(_) | midas_core::Error::Parse { .. } => 3,
                midas_core::Error::Argument(_) | midas_core::Error::DimensionMismatch { .. } => 2,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, true),
        Command::Sweep(a) => cmd_run(a, false),
        Command::Eval(a) => cmd_eval(a),
        Command::ValidateSchedule(a) => cmd_validate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::MakeWaveform(a) => cmd_waveform(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
