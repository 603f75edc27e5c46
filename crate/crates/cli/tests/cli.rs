//! CLI contract tests: exit codes, file formats, config-file merging.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn semshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semshift"))
        .args(args)
        .output()
        .expect("failed to launch semshift")
}

fn run_ok(args: &[&str]) -> String {
    let output = semshift(args);
    assert!(
        output.status.success(),
        "semshift {args:?} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).unwrap()
}

fn synth_small(out: &Path, seed: &str) {
    run_ok(&[
        "synth",
        "--seed",
        seed,
        "--n-changed",
        "2",
        "--n-stable",
        "2",
        "--sentences",
        "60",
        "--topic-vocab",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
}

#[test]
fn predict_system1_labels_the_upper_third_of_18_targets() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::new();
    for i in 0..18 {
        // Distances descending with i: targets t00..t05 most changed.
        let d = 2.0 - i as f64 * 0.1;
        table.push_str(&format!("t{i:02}\t{d:.6}\t{d:.6}\t{d:.6}\n"));
    }
    fs::write(dir.path().join("pos_distances.tsv"), table).unwrap();

    run_ok(&[
        "predict",
        "--scheme",
        "system1",
        "--pos-distances",
        dir.path().join("pos_distances.tsv").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);

    let predictions = fs::read_to_string(dir.path().join("predictions.tsv")).unwrap();
    let lines: Vec<&str> = predictions.lines().collect();
    assert_eq!(lines.len(), 18);
    let ones = lines.iter().filter(|l| l.ends_with("\t1")).count();
    assert_eq!(ones, 6);
    // Lexicographic row order.
    let mut sorted = lines.clone();
    sorted.sort_unstable();
    assert_eq!(lines, sorted);
}

#[test]
fn synth_runs_are_byte_identical_for_the_same_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth_small(a.path(), "7");
    synth_small(b.path(), "7");
    for name in ["t0.tsv", "t1.tsv", "gold.tsv", "targets.tsv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn missing_targets_file_exits_1_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path(), "3");
    let missing = dir.path().join("no_such_targets.tsv");
    let output = semshift(&[
        "pos-model",
        "--t0",
        dir.path().join("t0.tsv").to_str().unwrap(),
        "--t1",
        dir.path().join("t1.tsv").to_str().unwrap(),
        "--targets",
        missing.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("no_such_targets.tsv"),
        "stderr does not name the path: {stderr}"
    );
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(semshift(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(semshift(&["synth", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn config_file_stands_in_for_flags_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        "# synth settings\nseed = 3\nn-changed = 2\nn-stable = 2\nsentences = 60\ntopic-vocab = 16\n",
    )
    .unwrap();

    let from_config = dir.path().join("from_config");
    run_ok(&[
        "synth",
        "--config",
        config.to_str().unwrap(),
        "--out",
        from_config.to_str().unwrap(),
    ]);
    let from_flags = dir.path().join("from_flags");
    synth_small(&from_flags, "3");
    assert_eq!(
        fs::read(from_config.join("t0.tsv")).unwrap(),
        fs::read(from_flags.join("t0.tsv")).unwrap(),
        "config-driven run differs from flag-driven run"
    );

    // A flag overrides the config value.
    let overridden = dir.path().join("overridden");
    run_ok(&[
        "synth",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        overridden.to_str().unwrap(),
    ]);
    let direct = dir.path().join("direct");
    synth_small(&direct, "9");
    assert_eq!(
        fs::read(overridden.join("t0.tsv")).unwrap(),
        fs::read(direct.join("t0.tsv")).unwrap()
    );
    assert_ne!(
        fs::read(overridden.join("t0.tsv")).unwrap(),
        fs::read(from_config.join("t0.tsv")).unwrap(),
        "--seed 9 did not override the config seed"
    );
}

#[test]
fn evaluate_reports_accuracy_and_error_sets() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("predictions.tsv"),
        "ape\t1\ncasa\t0\ntac\t1\n",
    )
    .unwrap();
    fs::write(dir.path().join("gold.tsv"), "ape\t1\ncasa\t1\ntac\t0\n").unwrap();
    let stdout = run_ok(&[
        "evaluate",
        "--predictions",
        dir.path().join("predictions.tsv").to_str().unwrap(),
        "--gold",
        dir.path().join("gold.tsv").to_str().unwrap(),
    ]);
    assert!(stdout.contains("accuracy 0.3333"), "stdout: {stdout}");
    assert!(stdout.contains("false positives: tac"), "stdout: {stdout}");
    assert!(stdout.contains("false negatives: casa"), "stdout: {stdout}");
}

#[test]
fn sweep_writes_the_pinned_csv_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    synth_small(dir.path(), "5");
    run_ok(&[
        "train",
        "--t0",
        dir.path().join("t0.tsv").to_str().unwrap(),
        "--t1",
        dir.path().join("t1.tsv").to_str().unwrap(),
        "--dim",
        "16",
        "--epochs",
        "2",
        "--min-count",
        "1",
        "--deterministic",
        "--seed",
        "1",
        "--out",
        out,
    ]);
    run_ok(&[
        "sweep",
        "--t0-model",
        dir.path().join("t0.vec").to_str().unwrap(),
        "--t1-model",
        dir.path().join("t1.vec").to_str().unwrap(),
        "--targets",
        dir.path().join("targets.tsv").to_str().unwrap(),
        "--gold",
        dir.path().join("gold.tsv").to_str().unwrap(),
        "--k-min",
        "1",
        "--k-max",
        "3",
        "--aggregation",
        "t0-only",
        "--aggregation",
        "union",
        "--out",
        out,
    ]);
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "measure,aggregation,k,changed_min,changed_max,stable_min,stable_max,overlap_min,overlap_max,best_threshold,best_accuracy"
    );
    // 3 measures x 2 aggregations x 3 k values.
    assert_eq!(lines.count(), 18);
}
