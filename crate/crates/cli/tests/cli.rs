//! End-to-end tests of the `kcoreset` binary: artifact files, stdout
//! summaries, determinism, config precedence, and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kcoreset"))
}

fn write_blob_csv(path: &Path, n: usize) {
    let mut rows = String::new();
    for i in 0..n {
        let (cx, cy) = if i % 2 == 0 { (0.0, 0.0) } else { (50.0, 50.0) };
        let dx = ((i * 37) % 17) as f64 * 0.1;
        let dy = ((i * 53) % 19) as f64 * 0.1;
        rows.push_str(&format!("{},{}\n", cx + dx, cy + dy));
    }
    std::fs::write(path, rows).unwrap();
}

fn run_ok(cmd: &mut Command) -> serde_json::Value {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    parse_summary(&out)
}

fn parse_summary(out: &Output) -> serde_json::Value {
    let stdout = String::from_utf8_lossy(&out.stdout);
    let line = stdout.trim();
    assert!(
        !line.contains('\n'),
        "summary must be a single line, got: {stdout}"
    );
    serde_json::from_str(line).expect("stdout is one JSON line")
}

#[test]
fn build_produces_artifacts_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_blob_csv(&input, 400);
    let out_dir = dir.path().join("out");
    let summary = run_ok(bin().args([
        "build",
        "--input",
        input.to_str().unwrap(),
        "--kernel",
        "rbf",
        "--sigma",
        "30",
        "-k",
        "3",
        "-N",
        "50",
        "--seed",
        "7",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(summary["command"], "build");
    assert_eq!(summary["n"], 400);
    assert!(summary["coreset_entries"].as_u64().unwrap() <= 50);
    assert_eq!(summary["identity"], false);
    for f in ["coreset.csv", "coreset.json", "manifest.json"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("coreset.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["k"], 3);
    assert_eq!(sidecar["n_samples"], 50);
    assert_eq!(sidecar["kernel"]["kind"], "rbf");
    assert_eq!(sidecar["kernel"]["sigma"], 30.0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "build");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn build_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_blob_csv(&input, 300);
    let run = |out: &PathBuf| {
        run_ok(bin().args([
            "build",
            "--input",
            input.to_str().unwrap(),
            "-N",
            "40",
            "--seed",
            "11",
            "--threads",
            "1",
            "--out-dir",
            out.to_str().unwrap(),
        ]));
        std::fs::read_to_string(out.join("coreset.csv")).unwrap()
    };
    let a = run(&dir.path().join("a"));
    let b = run(&dir.path().join("b"));
    assert_eq!(a, b, "same seed must produce identical artifacts");
}

#[test]
fn build_identity_warns_when_small() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_blob_csv(&input, 20);
    let out_dir = dir.path().join("out");
    let out = bin()
        .args([
            "build",
            "--input",
            input.to_str().unwrap(),
            "-N",
            "100",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary = parse_summary(&out);
    assert_eq!(summary["identity"], true);
    assert_eq!(summary["coreset_entries"], 20);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("identity"), "expected a warning, got {stderr}");
}

#[test]
fn eval_error_identity_builder_reports_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_blob_csv(&input, 200);
    let out_dir = dir.path().join("out");
    let summary = run_ok(bin().args([
        "eval-error",
        "--input",
        input.to_str().unwrap(),
        "--builder",
        "identity",
        "-k",
        "3",
        "--center-sets",
        "10",
        "--repetitions",
        "3",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(summary["mean"], 0.0);
    assert_eq!(summary["max"], 0.0);
    let csv = std::fs::read_to_string(out_dir.join("error_report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4); // header + 3 repetitions
    assert!(out_dir.join("error_report.json").exists());
}

#[test]
fn solve_writes_solution_and_assignment() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_blob_csv(&input, 300);
    let out_dir = dir.path().join("out");
    let summary = run_ok(bin().args([
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--kernel",
        "rbf",
        "--sigma",
        "30",
        "-k",
        "2",
        "-N",
        "60",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(summary["command"], "solve");
    assert!(summary["objective"].as_f64().unwrap() >= 0.0);
    let solution: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("solution.json")).unwrap())
            .unwrap();
    let centers = solution["centers"].as_array().unwrap();
    assert_eq!(centers.len(), 2);
    for c in centers {
        let coeffs: Vec<f64> = c["coeffs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        let sum: f64 = coeffs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "coefficients sum to {sum}");
    }
    let assignment = std::fs::read_to_string(out_dir.join("assignment.csv")).unwrap();
    assert_eq!(assignment.lines().count(), 301); // header + one row per point
}

#[test]
fn spectral_recovers_two_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let n = 40;
    let half = n / 2;
    let mut rows = String::new();
    for i in 0..n {
        let mut row: Vec<&str> = Vec::with_capacity(n);
        for j in 0..n {
            row.push(if (i < half) == (j < half) { "1.0" } else { "0.0" });
        }
        rows.push_str(&row.join(","));
        rows.push('\n');
    }
    let sim = dir.path().join("similarity.csv");
    std::fs::write(&sim, rows).unwrap();
    let out_dir = dir.path().join("out");
    let summary = run_ok(bin().args([
        "spectral",
        "--similarity",
        sim.to_str().unwrap(),
        "-k",
        "2",
        "-N",
        "40",
        "--degree-sample-size",
        "10",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(summary["command"], "spectral");
    assert_eq!(summary["n"], 40);
    let partition = std::fs::read_to_string(out_dir.join("partition.csv")).unwrap();
    let clusters: Vec<u32> = partition
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(clusters.len(), n);
    assert!(clusters[..half].iter().all(|&c| c == clusters[0]));
    assert!(clusters[half..].iter().all(|&c| c != clusters[0]));
    assert!(out_dir.join("metrics.json").exists());
}

#[test]
fn stream_builds_coreset_from_replayed_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_blob_csv(&input, 500);
    let out_dir = dir.path().join("out");
    let summary = run_ok(bin().args([
        "stream",
        "--input",
        input.to_str().unwrap(),
        "-k",
        "2",
        "-N",
        "30",
        "--bucket-size",
        "120",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(summary["command"], "stream");
    assert_eq!(summary["stream_len"], 500);
    assert_eq!(summary["buckets"], 4);
    assert!(summary["coreset_entries"].as_u64().unwrap() <= 30);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("coreset.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["mode"], "stream");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_blob_csv(&input, 150);
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "kernel = \"rbf\"\nsigma = 25.0\nk = 4\ncoreset_size = 30\nseed = 3\n",
    )
    .unwrap();
    let out_a = dir.path().join("a");
    let summary = run_ok(bin().args([
        "build",
        "--input",
        input.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        out_a.to_str().unwrap(),
    ]));
    assert!(summary["coreset_entries"].as_u64().unwrap() <= 30);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["k"], 4);
    assert_eq!(manifest["config"]["kernel"]["sigma"], 25.0);
    assert_eq!(manifest["config"]["seed"], 3);

    // A flag beats the config file.
    let out_b = dir.path().join("b");
    run_ok(bin().args([
        "build",
        "--input",
        input.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--sigma",
        "99",
        "--out-dir",
        out_b.to_str().unwrap(),
    ]));
    let manifest_b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_b.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest_b["config"]["kernel"]["sigma"], 99.0);
}

#[test]
fn env_var_overrides_default_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    write_blob_csv(&input, 60);
    let env_out = dir.path().join("env-out");
    let out = bin()
        .args(["build", "--input", input.to_str().unwrap(), "-N", "10"])
        .env("KCORESET_OUT_DIR", env_out.to_str().unwrap())
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_out.join("coreset.csv").exists());
}

#[test]
fn exit_codes_distinguish_failure_stages() {
    let dir = tempfile::tempdir().unwrap();

    // Missing sigma: validation error -> 2.
    let input = dir.path().join("data.csv");
    write_blob_csv(&input, 30);
    let out = bin()
        .args(["build", "--input", input.to_str().unwrap(), "--kernel", "rbf"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Ragged CSV: parse error -> 3.
    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1.0,2.0\n3.0\n").unwrap();
    let out = bin()
        .args([
            "build",
            "--input",
            ragged.to_str().unwrap(),
            "--out-dir",
            dir.path().join("o3").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);

    // Nonpositive weight: validation -> 2.
    let badw = dir.path().join("badw.csv");
    std::fs::write(&badw, "1.0,0.0\n2.0,1.0\n").unwrap();
    let out = bin()
        .args([
            "build",
            "--input",
            badw.to_str().unwrap(),
            "--weighted",
            "--out-dir",
            dir.path().join("o4").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Indefinite precomputed kernel -> 4.
    let indef = dir.path().join("indef.csv");
    std::fs::write(&indef, "1.0,3.0\n3.0,1.0\n").unwrap();
    let out = bin()
        .args([
            "build",
            "--kernel",
            "precomputed",
            "--kernel-matrix",
            indef.to_str().unwrap(),
            "-N",
            "1",
            "-k",
            "1",
            "--out-dir",
            dir.path().join("o5").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    // Zero-degree similarity row -> 5.
    let zerorow = dir.path().join("zero.csv");
    std::fs::write(&zerorow, "0.0,0.0,0.0\n0.0,1.0,0.0\n0.0,0.0,1.0\n").unwrap();
    let out = bin()
        .args([
            "spectral",
            "--similarity",
            zerorow.to_str().unwrap(),
            "-k",
            "2",
            "--exact-degrees",
            "--out-dir",
            dir.path().join("o6").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn precomputed_kernel_without_input_uses_opaque_ids() {
    let dir = tempfile::tempdir().unwrap();
    // Gram matrix of 1-D points {0, 1, 2, 5} under the linear kernel.
    let xs = [0.0f64, 1.0, 2.0, 5.0];
    let mut rows = String::new();
    for a in xs {
        let row: Vec<String> = xs.iter().map(|b| format!("{}", a * b)).collect();
        rows.push_str(&row.join(","));
        rows.push('\n');
    }
    let matrix = dir.path().join("gram.csv");
    std::fs::write(&matrix, rows).unwrap();
    let out_dir = dir.path().join("out");
    let summary = run_ok(bin().args([
        "build",
        "--kernel",
        "precomputed",
        "--kernel-matrix",
        matrix.to_str().unwrap(),
        "-k",
        "2",
        "-N",
        "3",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(summary["n"], 4);
    assert!(summary["coreset_entries"].as_u64().unwrap() <= 3);
}

#[test]
fn weighted_ingestion_reaches_the_coreset() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("w.csv");
    std::fs::write(&input, "0.0,5.0\n10.0,1.0\n").unwrap();
    let out_dir = dir.path().join("out");
    let summary = run_ok(bin().args([
        "build",
        "--input",
        input.to_str().unwrap(),
        "--weighted",
        "-N",
        "10",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]));
    // Identity coreset keeps the original weights 5 + 1.
    assert_eq!(summary["total_weight"], 6.0);
}
