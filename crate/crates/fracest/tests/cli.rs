//! End-to-end checks of the command-line surface: exit codes, error
//! wording, report determinism, manifests, and the CSV round trip.

use std::path::Path;
use std::process::{Command, Output};

use fracest::GridFunction;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_fracest")
}

fn run(args: &[&str]) -> Output {
    Command::new(exe()).args(args).output().expect("spawn fracest")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(exe())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn fracest")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn point_report_is_deterministic_and_manifested() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sample.txt");
    std::fs::write(&input, "0.1\n0.4\n0.7\n0.9\n").unwrap();
    let out = dir.path().join("report.json");

    let mut bytes = Vec::new();
    for _ in 0..2 {
        let r = run(&[
            "point",
            "--input",
            input.to_str().unwrap(),
            "--alpha",
            "0.25",
            "--x",
            "0.5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "stderr: {}", stderr_of(&r));
        bytes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let text = String::from_utf8(bytes[0].clone()).unwrap();
    assert!(text.contains("\"estimate\""), "report: {text}");

    let manifest = dir.path().join("report.json.manifest.json");
    let mtext = std::fs::read_to_string(&manifest).unwrap();
    assert!(mtext.contains("\"sha256\""), "manifest: {mtext}");
    assert!(mtext.contains("sample.txt"), "manifest: {mtext}");
}

#[test]
fn scalar_csv_is_key_value_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sample.txt");
    std::fs::write(&input, "0.2\n0.5\n0.8\n").unwrap();
    let r = run(&[
        "point",
        "--input",
        input.to_str().unwrap(),
        "--alpha",
        "0.1",
        "--x",
        "0.5",
        "--format",
        "csv",
    ]);
    assert!(r.status.success(), "stderr: {}", stderr_of(&r));
    let text = String::from_utf8(r.stdout).unwrap();
    let has_estimate_row = text
        .lines()
        .any(|l| l.starts_with("estimate,") && l.split(',').count() == 2);
    assert!(has_estimate_row, "csv: {text}");
}

#[test]
fn curve_csv_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sample.txt");
    std::fs::write(&input, "0.15\n0.35\n0.55\n0.75\n0.95\n").unwrap();
    let r = run(&[
        "curve",
        "--input",
        input.to_str().unwrap(),
        "--alpha",
        "0.25",
        "--grid",
        "32",
        "--format",
        "csv",
    ]);
    assert!(r.status.success(), "stderr: {}", stderr_of(&r));
    let text = String::from_utf8(r.stdout).unwrap();
    let reloaded = GridFunction::from_csv_str(&text).unwrap();
    assert_eq!(reloaded.to_csv_string(), text);
}

#[test]
fn out_of_range_alpha_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sample.txt");
    std::fs::write(&input, "0.5\n").unwrap();
    let r = run(&[
        "point",
        "--input",
        input.to_str().unwrap(),
        "--alpha",
        "0.7",
        "--x",
        "0.5",
    ]);
    assert_eq!(r.status.code(), Some(1), "stderr: {}", stderr_of(&r));
    assert!(stderr_of(&r).contains("1/2"), "stderr: {}", stderr_of(&r));
}

#[test]
fn missing_input_is_io_error() {
    let r = run(&[
        "point",
        "--input",
        "/definitely/not/here.txt",
        "--alpha",
        "0.25",
        "--x",
        "0.5",
    ]);
    assert_eq!(r.status.code(), Some(2), "stderr: {}", stderr_of(&r));
}

#[test]
fn negative_observation_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sample.txt");
    std::fs::write(&input, "0.5\n-1\n").unwrap();
    let r = run(&[
        "point",
        "--input",
        input.to_str().unwrap(),
        "--alpha",
        "0.25",
        "--x",
        "0.5",
    ]);
    assert_eq!(r.status.code(), Some(1), "stderr: {}", stderr_of(&r));
    assert!(stderr_of(&r).contains("line 2"), "stderr: {}", stderr_of(&r));
}

#[test]
fn malformed_pair_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pairs.txt");
    std::fs::write(&input, "0.1,0.2\n0.3\n").unwrap();
    let r = run(&[
        "mixed",
        "--input",
        input.to_str().unwrap(),
        "--alpha",
        "0.3",
        "--beta",
        "0.2",
        "--x",
        "0.5",
        "--y",
        "0.5",
    ]);
    assert_eq!(r.status.code(), Some(1), "stderr: {}", stderr_of(&r));
    assert!(stderr_of(&r).contains("line 2"), "stderr: {}", stderr_of(&r));
}

#[test]
fn unwritable_out_path_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sample.txt");
    std::fs::write(&input, "0.5\n").unwrap();
    let r = run(&[
        "point",
        "--input",
        input.to_str().unwrap(),
        "--alpha",
        "0.25",
        "--x",
        "0.5",
        "--out",
        "/definitely/not/a/dir/report.json",
    ]);
    assert_eq!(r.status.code(), Some(2), "stderr: {}", stderr_of(&r));
}

#[test]
fn unknown_experiment_lists_registered_names() {
    let r = run(&["mc", "--experiment", "frobnicate", "--seed", "1"]);
    assert_eq!(r.status.code(), Some(1), "stderr: {}", stderr_of(&r));
    let msg = stderr_of(&r);
    assert!(msg.contains("registered"), "stderr: {msg}");
    assert!(msg.contains("unbiasedness"), "stderr: {msg}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("loss.kv");
    std::fs::write(&cfg, "alpha=0.25\nq=2.0\nn=5\nreps=10\nbogus=1\n").unwrap();
    let r = run(&[
        "mc",
        "--experiment",
        "loss",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "1",
    ]);
    assert_eq!(r.status.code(), Some(1), "stderr: {}", stderr_of(&r));
    assert!(stderr_of(&r).contains("bogus"), "stderr: {}", stderr_of(&r));
}

#[test]
fn env_seed_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("loss.kv");
    std::fs::write(&cfg, "alpha=0.25\nq=2.0\nn=5\nreps=10\n").unwrap();
    let r = Command::new(exe())
        .env("FRACEST_SEED", "77")
        .args(["mc", "--experiment", "loss", "--config", cfg.to_str().unwrap()])
        .output()
        .expect("spawn fracest");
    assert!(r.status.success(), "stderr: {}", stderr_of(&r));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("\"seed\": 77"), "report: {text}");
}

#[test]
fn spectral_simulation_runs_and_saves_series() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.txt");
    let r = run_in(
        dir.path(),
        &[
            "spectral",
            "--model",
            "ar1:0.6",
            "--alpha",
            "0.25",
            "--n",
            "64",
            "--reps",
            "20",
            "--paths",
            "50",
            "--lambda-grid",
            "8",
            "--seed",
            "5",
            "--series-out",
            series.to_str().unwrap(),
        ],
    );
    assert!(r.status.success(), "stderr: {}", stderr_of(&r));
    let saved = std::fs::read_to_string(&series).unwrap();
    assert_eq!(saved.lines().count(), 64);

    // feeding the saved series back reproduces the estimate exactly
    let replay = run_in(
        dir.path(),
        &[
            "spectral",
            "--model",
            "ar1:0.6",
            "--alpha",
            "0.25",
            "--n",
            "64",
            "--reps",
            "20",
            "--paths",
            "50",
            "--lambda-grid",
            "8",
            "--seed",
            "5",
            "--series-in",
            series.to_str().unwrap(),
        ],
    );
    assert!(replay.status.success(), "stderr: {}", stderr_of(&replay));
}

#[test]
fn selftest_exits_clean() {
    let r = run(&["selftest"]);
    assert!(r.status.success(), "stderr: {}", stderr_of(&r));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("checks passed"), "stdout: {text}");
}
