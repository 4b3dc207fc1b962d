use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn midas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_midas")).args(args).output().expect("spawning midas")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn small_run(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--experiment",
        "coldstart",
        "--dim",
        "1",
        "--budget",
        "4000",
        "--batch",
        "100",
        "--checkpoint-every",
        "1000",
        "--set",
        "n_proj=50",
        "--set",
        "reference_size=500",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    midas(&args)
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "timings.jsonl" {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn eta_out_of_range_is_a_config_error() {
    let out = midas(&["validate-schedule", "--eta", "1.5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let out = midas(&["validate-schedule", "--set", "bandwith_scale=0.5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("valid keys"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = midas(&["validate-schedule", "--config", "/nonexistent/midas.json"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn strict_validation_failure() {
    let out = midas(&["validate-schedule", "--set", "gamma_exponent=0.4", "--strict"]);
    assert_eq!(code(&out), 4);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report[0]["verdict"], "fail");

    let lenient = midas(&["validate-schedule", "--set", "gamma_exponent=0.4"]);
    assert_eq!(code(&lenient), 0);
}

#[test]
fn validate_reports_every_eta() {
    let out = midas(&["validate-schedule", "--eta", "0.25,1", "--dim", "3"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = report.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r["dim"], 3);
        assert!(r["checks"].as_array().unwrap().len() >= 4);
    }
}

#[test]
fn run_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&small_run(&a, &["--seed", "3"])), 0);
    assert_eq!(code(&small_run(&b, &["--seed", "3"])), 0);
    let (fa, fb) = (files_under(&a), files_under(&b));
    assert!(fa.iter().any(|(name, _)| name.ends_with("metrics.csv")));
    assert!(fa.iter().any(|(name, _)| name.contains("particles_")));
    // the spec records the output directory, which differs by design
    let strip = |v: Vec<(String, Vec<u8>)>, root: &Path| -> Vec<(String, String)> {
        v.into_iter()
            .map(|(n, bytes)| (n, String::from_utf8(bytes).unwrap().replace(root.to_str().unwrap(), "OUT")))
            .collect()
    };
    assert_eq!(strip(fa, &a), strip(fb, &b));
}

#[test]
fn run_rejects_several_configurations() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_run(&tmp.path().join("x"), &["--eta", "0.5,1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep"));
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 7, "dim": 1, "budget": 4000, "batch": 100, "n_proj": 50, "reference_size": 500}"#).unwrap();
    let out_dir = tmp.path().join("o");
    let out = midas(&["run", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let spec: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("spec.json")).unwrap()).unwrap();
    assert_eq!(spec["seed"], 9);
    assert_eq!(spec["budget"], 4000);
}

#[test]
fn eval_reads_a_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("r");
    assert_eq!(code(&small_run(&out_dir, &[])), 0);
    let run = fs::read_dir(out_dir.join("runs")).unwrap().next().unwrap().unwrap().path();
    let dump = run.join("particles_4000.csv");
    assert!(dump.exists());
    let out = midas(&["eval", "--dump", dump.to_str().unwrap(), "--target", "coldstart", "--dim", "1", "--n-proj", "20"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    let sw2: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert!(sw2.is_finite() && sw2 >= 0.0);

    let wrong = midas(&["eval", "--dump", dump.to_str().unwrap(), "--target", "coldstart", "--dim", "3"]);
    assert_eq!(code(&wrong), 2);
    let missing = midas(&["eval", "--dump", "/nonexistent.csv", "--target", "coldstart", "--dim", "1"]);
    assert_eq!(code(&missing), 3);
}

#[test]
fn waveform_and_predict() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("wave.csv");
    let out = midas(&["make-waveform", "--out", data.to_str().unwrap(), "--n", "600"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 600);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 22);

    let out_dir = tmp.path().join("lr");
    let out = midas(&[
        "run",
        "--experiment",
        "bayeslogistic",
        "--data",
        data.to_str().unwrap(),
        "--algo",
        "submidas",
        "--budget",
        "3000",
        "--batch",
        "100",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let run = fs::read_dir(out_dir.join("runs")).unwrap().next().unwrap().unwrap().path();
    let dump = run.join("particles_3000.csv");
    let out = midas(&["predict", "--dump", dump.to_str().unwrap(), "--data", data.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut fields = text.lines().nth(1).unwrap().split(',');
    assert_eq!(fields.next().unwrap(), "200");
    let acc: f64 = fields.next().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn sweep_writes_an_aggregate_row_per_configuration() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("s");
    let out = midas(&[
        "sweep", "--dim", "1", "--eta", "0.5,1", "--seeds", "2", "--budget", "3000", "--batch", "100",
        "--set", "n_proj=20", "--set", "reference_size=200", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(out_dir.join("runs")).unwrap().count(), 4);
    let agg = fs::read_to_string(out_dir.join("aggregate.csv")).unwrap();
    assert!(agg.lines().next().unwrap().starts_with("budget,eta,algo"));
    assert!(agg.lines().skip(1).all(|l| l.split(',').nth(3) == Some("2")));
    assert!(!out_dir.join("runs").read_dir().unwrap().any(|e| e.unwrap().path().join("particles_3000.csv").exists()));
}
