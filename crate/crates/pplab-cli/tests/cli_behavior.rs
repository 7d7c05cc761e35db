//! CLI contract tests: determinism, worker-count independence, describe,
//! exit codes, and report emission.

use pplab_cli::config::{default_config, ExperimentConfig, ExperimentSpec};
use pplab_cli::experiments::run_experiment;
use pplab_cli::report::{emit_report, ReportFormat};
use std::process::Command;

fn small_runs_config() -> ExperimentConfig {
    let mut config = default_config("runs").unwrap();
    config.replicates = 300;
    if let ExperimentSpec::Runs(p) = &mut config.experiment {
        p.hypothesis_reps = 20_000;
    }
    config
}

#[test]
fn same_seed_gives_byte_identical_outputs() {
    let config = small_runs_config();
    let (report_a, bundle_a) = run_experiment(&config).unwrap();
    let (report_b, bundle_b) = run_experiment(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    emit_report(&report_a, &bundle_a, &out_a, ReportFormat::CsvBundle).unwrap();
    emit_report(&report_b, &bundle_b, &out_b, ReportFormat::CsvBundle).unwrap();
    for name in ["counts.csv", "extremes.csv", "cdf_pairs.csv"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // report.json differs only in the runtime field
    let mut ra = report_a.clone();
    let mut rb = report_b.clone();
    ra.runtime_seconds = 0.0;
    rb.runtime_seconds = 0.0;
    assert_eq!(ra, rb);
}

#[test]
fn results_independent_of_worker_count() {
    let mut config = small_runs_config();
    config.workers = 1;
    let (mut one, _) = run_experiment(&config).unwrap();
    config.workers = 2;
    let (mut two, _) = run_experiment(&config).unwrap();
    one.runtime_seconds = 0.0;
    two.runtime_seconds = 0.0;
    two.config.workers = 1;
    assert_eq!(one, two, "worker count changed the results");
}

#[test]
fn describe_prints_schedule_without_running() {
    let out = Command::new(env!("CARGO_BIN_EXE_pplab"))
        .args(["runs", "--describe"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("experiment: runs"));
    assert!(text.contains("horizon"));
}

#[test]
fn exit_code_two_on_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pplab"))
        .args(["runs", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // kind mismatch between subcommand and config
    let config = default_config("inradius").unwrap();
    let path = dir.path().join("inradius.json");
    std::fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pplab"))
        .args(["runs", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes_zero_and_one() {
    let dir = tempfile::tempdir().unwrap();
    // a fast passing run
    let out = Command::new(env!("CARGO_BIN_EXE_pplab"))
        .args(["pk-estimate", "--json-only", "--out"])
        .arg(dir.path().join("ok"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    // a statistical rejection: the battery run at level 0.2 rejects far
    // more often than the configured ceiling allows
    let mut config = default_config("null_calibration").unwrap();
    if let ExperimentSpec::NullCalibration(p) = &mut config.experiment {
        p.trials = 150;
        p.replicates_per_trial = 200;
        p.level = 0.2;
        p.max_rejection_rate = 1e-4;
    }
    let path = dir.path().join("reject.json");
    std::fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pplab"))
        .args(["null-calibration", "--json-only", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("rej"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn emitted_report_parses_back() {
    let config = default_config("pk_estimate").unwrap();
    let (report, bundle) = run_experiment(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&report, &bundle, dir.path(), ReportFormat::CsvBundle).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let parsed: pplab_cli::report::Report = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, report);
    // every reported number carries a standard error or the exact flag
    for entry in &parsed.entries {
        for m in &entry.metrics {
            assert!(
                m.exact || m.std_error.is_some(),
                "metric {} lacks both exactness and a standard error",
                m.name
            );
        }
    }
}
