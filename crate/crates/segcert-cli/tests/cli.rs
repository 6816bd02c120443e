//! Integration tests for the file formats and the binary's behaviour: strict
//! parsing with useful positions, stable exit codes, and cross-command
//! consistency.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use segcert_cli::formats::{parse_counts_file, parse_label_file, write_counts_file};
use segcert_cli::CliError;

use segcert::smoothing::CountsMatrix;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_segcert"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

const VALID_COUNTS: &str = "segcert-counts 1\nN=2 C=2 n0=10 n=100\n10 0 | 100 0\n0 10 | 25 75\n";

// ------------------------------------------------------------- formats ----

#[test]
fn counts_file_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let src = write(dir.path(), "src.txt", VALID_COUNTS);
    let (counts0, counts) = parse_counts_file(&src).unwrap();
    assert_eq!(counts0.draws(), 10);
    assert_eq!(counts.draws(), 100);
    assert_eq!(counts0.row(0), &[10, 0]);
    assert_eq!(counts.row(1), &[25, 75]);

    let copy = dir.path().join("copy.txt");
    write_counts_file(&copy, &counts0, &counts).unwrap();
    assert_eq!(fs::read_to_string(&copy).unwrap(), VALID_COUNTS);
}

#[test]
fn counts_file_round_trip_through_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let rows0: Vec<Vec<u32>> = (0..13).map(|i| vec![40 - i, i, 0, 2]).collect();
    let rows1: Vec<Vec<u32>> = (0..13).map(|i| vec![7, 80 - i, i, 3]).collect();
    let counts0 = CountsMatrix::from_rows(&rows0, 42).unwrap();
    let counts = CountsMatrix::from_rows(&rows1, 90).unwrap();
    let path = dir.path().join("c.txt");
    write_counts_file(&path, &counts0, &counts).unwrap();
    let (back0, back) = parse_counts_file(&path).unwrap();
    assert_eq!(back0, counts0);
    assert_eq!(back, counts);
}

#[test]
fn minimal_counts_file_parses() {
    let dir = tempfile::tempdir().unwrap();
    let src = write(
        dir.path(),
        "min.txt",
        "segcert-counts 1\nN=1 C=2 n0=1 n=2\n1 0 | 2 0\n",
    );
    let (counts0, counts) = parse_counts_file(&src).unwrap();
    assert_eq!(counts0.row(0), &[1, 0]);
    assert_eq!(counts.row(0), &[2, 0]);
}

#[test]
fn counts_file_rejects_row_sum_violation_with_component() {
    let dir = tempfile::tempdir().unwrap();
    let src = write(
        dir.path(),
        "bad.txt",
        "segcert-counts 1\nN=2 C=2 n0=10 n=100\n10 0 | 100 0\n0 10 | 25 74\n",
    );
    let err = parse_counts_file(&src).unwrap_err();
    match err {
        CliError::Data(msg) => {
            assert!(msg.contains("component 1"), "{msg}");
            assert!(msg.contains(":4:"), "line number missing: {msg}");
            assert!(msg.contains("99"), "offending sum missing: {msg}");
        }
        other => panic!("wrong error kind: {other:?}"),
    }
}

#[test]
fn counts_file_rejects_structural_damage() {
    let dir = tempfile::tempdir().unwrap();
    for (name, content) in [
        ("magic", "segcert-counts 2\nN=1 C=2 n0=1 n=1\n1 0 | 1 0\n"),
        ("header", "segcert-counts 1\nN=1 C=2 n0=1\n1 0 | 1 0\n"),
        (
            "missing_row",
            "segcert-counts 1\nN=2 C=2 n0=1 n=1\n1 0 | 1 0\n",
        ),
        (
            "extra_row",
            "segcert-counts 1\nN=1 C=2 n0=1 n=1\n1 0 | 1 0\n1 0 | 1 0\n",
        ),
        ("no_pipe", "segcert-counts 1\nN=1 C=2 n0=1 n=1\n1 0 1 0\n"),
        (
            "two_pipes",
            "segcert-counts 1\nN=1 C=2 n0=1 n=1\n1 0 | | 1 0\n",
        ),
        (
            "alpha_token",
            "segcert-counts 1\nN=1 C=2 n0=1 n=1\n1 x | 1 0\n",
        ),
        (
            "negative",
            "segcert-counts 1\nN=1 C=2 n0=1 n=1\n-1 2 | 1 0\n",
        ),
        (
            "short_row",
            "segcert-counts 1\nN=1 C=3 n0=1 n=1\n1 0 | 1 0 0\n",
        ),
    ] {
        let src = write(dir.path(), name, content);
        assert!(
            matches!(parse_counts_file(&src), Err(CliError::Data(_))),
            "{name} should fail"
        );
    }
}

#[test]
fn label_file_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let src = write(dir.path(), "labels.txt", "0\n~\n3\n*\n");
    let truth = parse_label_file(&src, true).unwrap();
    assert_eq!(truth.len(), 4);
    // predictions must not carry the ignore sentinel
    assert!(matches!(
        parse_label_file(&src, false),
        Err(CliError::Data(_))
    ));
}

// --------------------------------------------------------------- binary ----

#[test]
fn certify_reports_radius_and_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let counts = write(dir.path(), "c.txt", VALID_COUNTS);
    let out = dir.path().join("out");
    let result = run(bin()
        .args(["certify", "--counts"])
        .arg(&counts)
        .args(["--sigma", "0.25", "--tau", "0.75", "--alpha", "0.001"])
        .args(["--correction", "holm", "--out"])
        .arg(&out));
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("R = 0.1686"), "{stdout}");
    let decisions = fs::read_to_string(out.join("decisions.txt")).unwrap();
    assert_eq!(decisions, "0\n~\n");
    assert!(out.join("summary.csv").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn certify_kfwer_budget_zero_matches_holm() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("segcert-counts 1\nN=6 C=2 n0=10 n=100\n");
    for hits in [100u32, 93, 88, 97, 75, 91] {
        body += &format!("10 0 | {hits} {}\n", 100 - hits);
    }
    let counts = write(dir.path(), "c.txt", &body);
    let mut decisions = Vec::new();
    for args in [
        vec!["--correction", "holm"],
        vec!["--correction", "kfwer", "--budget", "0"],
    ] {
        let out = dir.path().join(format!("out-{}", args[1]));
        let result = run(bin()
            .args(["certify", "--counts"])
            .arg(&counts)
            .args(["--sigma", "0.25", "--tau", "0.75", "--alpha", "0.01"])
            .args(&args)
            .arg("--out")
            .arg(&out));
        assert!(result.status.success());
        decisions.push(fs::read_to_string(out.join("decisions.txt")).unwrap());
    }
    assert_eq!(decisions[0], decisions[1]);
}

#[test]
fn certify_rejects_bad_tau_with_usage_exit() {
    let dir = tempfile::tempdir().unwrap();
    let counts = write(dir.path(), "c.txt", VALID_COUNTS);
    let result = run(bin()
        .args(["certify", "--counts"])
        .arg(&counts)
        .args(["--sigma", "0.25", "--tau", "0.4", "--alpha", "0.001"]));
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn certify_missing_file_is_data_error() {
    let result = run(bin()
        .args(["certify", "--counts", "/nonexistent/x.txt"])
        .args(["--sigma", "0.25", "--tau", "0.75", "--alpha", "0.001"]));
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn certify_malformed_counts_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let counts = write(
        dir.path(),
        "bad.txt",
        "segcert-counts 1\nN=1 C=2 n0=10 n=100\n9 0 | 100 0\n",
    );
    let result = run(bin()
        .args(["certify", "--counts"])
        .arg(&counts)
        .args(["--sigma", "0.25", "--tau", "0.75", "--alpha", "0.001"]));
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn certify_joint_class_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("segcert-joint 1\nN=3 C=2 n0=4 n=50\n");
    for _ in 0..4 {
        body += "0 1 0\n";
    }
    for _ in 0..50 {
        body += "0 1 0\n";
    }
    let joint = write(dir.path(), "j.txt", &body);
    let out = dir.path().join("out");
    let result = run(bin()
        .args(["certify", "--algorithm", "joint-class", "--joint-samples"])
        .arg(&joint)
        .args([
            "--sigma", "0.25", "--tau", "0.75", "--alpha", "0.01", "--out",
        ])
        .arg(&out));
    assert!(result.status.success(), "{result:?}");
    let decisions = fs::read_to_string(out.join("decisions.txt")).unwrap();
    assert_eq!(decisions, "0\n1\n0\n");

    // joint-class without the joint file is a usage error
    let counts = write(dir.path(), "c.txt", VALID_COUNTS);
    let result = run(bin()
        .args(["certify", "--algorithm", "joint-class", "--counts"])
        .arg(&counts)
        .args(["--sigma", "0.25", "--tau", "0.75", "--alpha", "0.01"]));
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn metrics_hand_example_row() {
    let dir = tempfile::tempdir().unwrap();
    let pred = write(dir.path(), "p.txt", "0\n~\n1\n2\n");
    let truth = write(dir.path(), "t.txt", "0\n0\n1\n*\n");
    let result = run(bin()
        .args(["metrics", "--pred"])
        .arg(&pred)
        .arg("--truth")
        .arg(&truth));
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("accuracy,miou,abstain_rate"));
    let row = lines.next().unwrap();
    let values: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((values[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((values[1] - 0.75).abs() < 1e-12);
    assert!((values[2] - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn metrics_identical_files_without_sentinels() {
    let dir = tempfile::tempdir().unwrap();
    let labels = write(dir.path(), "l.txt", "0\n1\n2\n1\n0\n");
    let result = run(bin()
        .args(["metrics", "--pred"])
        .arg(&labels)
        .arg("--truth")
        .arg(&labels));
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("\n1,1,0"), "{stdout}");
}

#[test]
fn metrics_error_exits() {
    let dir = tempfile::tempdir().unwrap();
    let pred = write(dir.path(), "p.txt", "0\n1\n");
    let short_truth = write(dir.path(), "t.txt", "0\n");
    let result = run(bin()
        .args(["metrics", "--pred"])
        .arg(&pred)
        .arg("--truth")
        .arg(&short_truth));
    assert_eq!(result.status.code(), Some(2));

    let ignored = write(dir.path(), "ig.txt", "*\n*\n");
    let result = run(bin()
        .args(["metrics", "--pred"])
        .arg(&pred)
        .arg("--truth")
        .arg(&ignored));
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn kfwer_requires_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let result = run(bin().args(["kfwer", "--budgets", "", "--out"]).arg(&out));
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn kfwer_budget_zero_matches_toy_holm_series() {
    let dir = tempfile::tempdir().unwrap();
    let toy_out = dir.path().join("toy.csv");
    let result = run(bin()
        .args([
            "toy", "--preset", "fig3c", "--reps", "3", "--seed", "5", "--out",
        ])
        .arg(&toy_out));
    assert!(result.status.success(), "{result:?}");
    let kf_out = dir.path().join("kf.csv");
    let result = run(bin()
        .args(["kfwer", "--budgets", "0", "--alpha", "0.1"])
        .args(["--n-grid", "1e2:1e5", "--reps", "3", "--seed", "5"])
        .args(["--num-noisy", "0", "--out"])
        .arg(&kf_out));
    assert!(result.status.success(), "{result:?}");

    // identical streams: the k = 1 sweep must reproduce the holm rates
    let toy_rates: Vec<(String, String)> = fs::read_to_string(&toy_out)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| l.contains("seg_certify_holm"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[2].to_string())
        })
        .collect();
    let kf_rates: Vec<(String, String)> = fs::read_to_string(&kf_out)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[3].to_string())
        })
        .collect();
    assert_eq!(toy_rates, kf_rates);
}

#[test]
fn toy_rejects_bad_preset_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let result = run(bin().args(["toy", "--preset", "fig9", "--out"]).arg(&out));
    assert_eq!(result.status.code(), Some(1));
    let result = run(bin().args(["toy", "--preset", "custom", "--out"]).arg(&out));
    assert_eq!(result.status.code(), Some(1)); // custom needs a gamma
    let result = run(bin()
        .args(["toy", "--preset", "fig3a", "--reps", "0", "--out"])
        .arg(&out));
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn toy_custom_noiseless_certifies_everything() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let result = run(bin()
        .args(["toy", "--preset", "custom", "--gamma", "0", "--reps", "4"])
        .args(["--n-components", "30", "--seed", "3", "--out"])
        .arg(&out));
    assert!(result.status.success(), "{result:?}");
    for line in fs::read_to_string(&out).unwrap().lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2], "1", "{line}");
    }
}

#[test]
fn threads_flag_and_env_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let result = run(bin()
        .args([
            "--threads",
            "1",
            "toy",
            "--preset",
            "custom",
            "--gamma",
            "0.02",
        ])
        .args([
            "--reps",
            "2",
            "--n-components",
            "10",
            "--seed",
            "1",
            "--out",
        ])
        .arg(&out));
    assert!(result.status.success());

    let result = run(bin()
        .env("SEGCERT_THREADS", "2")
        .args(["toy", "--preset", "custom", "--gamma", "0.02"])
        .args([
            "--reps",
            "2",
            "--n-components",
            "10",
            "--seed",
            "1",
            "--out",
        ])
        .arg(&out));
    assert!(result.status.success());

    let result = run(bin()
        .env("SEGCERT_THREADS", "zebra")
        .args(["toy", "--preset", "custom", "--gamma", "0.02"])
        .args([
            "--reps",
            "2",
            "--n-components",
            "10",
            "--seed",
            "1",
            "--out",
        ])
        .arg(&out));
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn manifest_written_next_to_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let result = run(bin()
        .args([
            "toy", "--preset", "custom", "--gamma", "0.01", "--reps", "2",
        ])
        .args(["--n-components", "10", "--seed", "1", "--out"])
        .arg(&out));
    assert!(result.status.success());
    let manifest = fs::read_to_string(dir.path().join("sweep.manifest.json")).unwrap();
    assert!(manifest.contains("\"tool\": \"segcert\""));
    assert!(manifest.contains("\"seed\": 1"));
    assert!(manifest.contains("\"coarsened\""));
}

/// Parsing a Cityscapes-sized counts file stays within a small multiple of
/// the matrices it returns (streaming, no whole-file buffering).
#[test]
fn counts_parse_streams_at_scale() {
    use segcert::synthetic::{oracle_sample, stream_rng, OracleSpec, Phase};

    let n_components = 2_000_000usize;
    let classes = 19u32;
    let oracle = OracleSpec {
        num_components: n_components,
        num_noisy: 0,
        gamma: 0.02,
        noise_multiplier: 5.0,
        num_classes: classes,
        true_labels: (0..n_components as u32).map(|i| i % classes).collect(),
        seed: 99,
    };
    let counts0 = oracle_sample(&oracle, 100, &mut stream_rng(99, 0, 0, Phase::Selection)).unwrap();
    let counts = oracle_sample(&oracle, 100, &mut stream_rng(99, 0, 0, Phase::Estimation)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.txt");
    write_counts_file(&path, &counts0, &counts).unwrap();
    let (back0, back) = parse_counts_file(&path).unwrap();
    assert_eq!(back0.num_components(), n_components);
    assert_eq!(back.row(12345), counts.row(12345));

    // peak RSS must stay under 4 * N * C * 8 bytes
    let budget = 4 * n_components as u64 * classes as u64 * 8;
    let peak_kb = peak_rss_kb();
    assert!(
        peak_kb * 1024 < budget,
        "peak RSS {} kB exceeds budget {} bytes",
        peak_kb,
        budget
    );
}

fn peak_rss_kb() -> u64 {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::zeroed();
    let rc = unsafe { libc::getrusage(libc::RUSAGE_SELF, usage.as_mut_ptr()) };
    assert_eq!(rc, 0, "getrusage failed");
    let usage = unsafe { usage.assume_init() };
    // ru_maxrss is reported in kilobytes on Linux
    usage.ru_maxrss as u64
}
