use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use qkls_bench::records::Method;
use qkls_bench::runs::recompute_error;
use qkls_bench::{run_compare, ExperimentConfig, Instance, RunMetadata};

fn qkls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkls")).args(args).output().expect("binary runs")
}

fn smoke_config() -> ExperimentConfig {
    ExperimentConfig {
        n: 2,
        target_kappas: vec![5.0],
        tau: 0.05,
        m_grid: vec![1, 2, 4],
        epsilon_targets: vec![0.5],
        fourier_truncations: vec![(1, 1), (4, 2)],
        workers: 1,
        ..ExperimentConfig::default()
    }
}

fn write_config(dir: &Path, config: &ExperimentConfig) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, config.to_json()).unwrap();
    path.to_str().unwrap().to_owned()
}

/// CSV text with the wall-time column blanked.
fn without_wall_time(csv: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "wall_time_ms").expect("wall_time_ms column");
    lines
        .map(|line| {
            let mut fields: Vec<&str> = line.split(',').collect();
            fields[col] = "";
            fields.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn smoke_run_is_fast_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &smoke_config());
    let started = Instant::now();
    let out = qkls(&["bench", "compare", "--config", &config_path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(started.elapsed().as_secs_f64() < 5.0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    // header + 3 QKLS points + 1 schedule + 2 truncations
    assert_eq!(stdout.lines().count(), 7, "{stdout}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("ordering"));
}

#[test]
fn output_is_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = smoke_config();
    config.shots = Some(500);
    config.seed = 7;
    let config_path = write_config(dir.path(), &config);
    let run = || {
        let out = qkls(&["bench", "qkls", "--config", &config_path, "--workers", "2"]);
        assert!(out.status.success());
        without_wall_time(&String::from_utf8(out.stdout).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn metadata_reproduces_recorded_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &smoke_config());
    let csv = dir.path().join("run.csv");
    let out = qkls(&["bench", "compare", "--config", &config_path, "-o", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(csv.exists());

    let meta: RunMetadata =
        serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    let config = &meta.config;
    for record in meta.records.iter().filter(|r| r.status == "ok") {
        let inst = Instance::new(config.n, config.coupling, record.kappa).unwrap();
        let again = recompute_error(&inst, record).unwrap();
        assert!((again - record.error).abs() <= 1e-12 * record.error.max(1.0), "{record:?}: {again}");
    }
}

#[test]
fn empty_epsilon_targets_is_a_configuration_error() {
    let mut config = smoke_config();
    config.epsilon_targets.clear();
    assert!(config.validate().is_err());
    assert!(ExperimentConfig::from_json(r#"{"epsilon_targets": []}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"unknown_field": 1}"#).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"epsilon_targets": []}"#).unwrap();
    let out = qkls(&["bench", "fourier", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn single_term_truncation_is_reported_not_fatal() {
    let out = run_compare(&smoke_config()).unwrap();
    let coarse = out
        .records
        .iter()
        .find(|r| r.method == Method::Fourier && r.terms == 3)
        .expect("J=1, K=1 point present");
    assert_eq!(coarse.status, "null-state");
    assert_eq!(coarse.error, 1.0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &smoke_config());
    let out = qkls(&["bench", "qkls", "--config", &config_path, "--m-grid", "1,3"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 3, "{stdout}");
}

#[test]
fn solve_prints_coefficients() {
    let out = qkls(&["solve", "--n", "3", "--kappa", "4", "--m", "3", "--tau", "0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("status=ok"), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("c[")).count(), 3);
}

#[test]
fn complexity_table_and_rejection() {
    let out = qkls(&["complexity", "--d", "11", "--kappa", "27.6", "--epsilon", "0.01", "--big-n", "1024"]);
    assert!(out.status.success());
    assert!(!String::from_utf8(out.stdout).unwrap().trim().is_empty());
    let bad = qkls(&["complexity", "--d", "11", "--kappa", "0.5", "--epsilon", "0.01", "--big-n", "1024"]);
    assert!(!bad.status.success());
}
