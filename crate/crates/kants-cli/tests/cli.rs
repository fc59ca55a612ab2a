//! End-to-end tests of the `kants` binary: file naming, exit codes,
//! determinism of artifacts, config layering, and the printed contracts
//! other tooling parses.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kants() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kants"))
}

fn iris_csv() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout:\n{}\nstderr:\n{}",
        stdout(out),
        stderr(out)
    );
}

/// Split iris into one 90/10 pair inside `dir`, returning the pair paths.
fn make_iris_split(dir: &Path) -> (PathBuf, PathBuf) {
    let out = kants()
        .args(["make-splits"])
        .arg(iris_csv())
        .args(["--fraction", "0.9", "--sets", "1", "--seed", "5", "--out"])
        .arg(dir)
        .output()
        .unwrap();
    assert_success(&out);
    (
        dir.join("iris-90tra-10tst-set1-train.csv"),
        dir.join("iris-90tra-10tst-set1-test.csv"),
    )
}

#[test]
fn make_splits_emits_named_pairs_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = kants()
        .args(["make-splits"])
        .arg(iris_csv())
        .args(["--fraction", "0.5", "--sets", "3", "--seed", "9", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_success(&out);

    for set in 1..=3 {
        let base = format!("iris-50tra-50tst-set{set}");
        let train = dir.path().join(format!("{base}-train.csv"));
        let test = dir.path().join(format!("{base}-test.csv"));
        let meta = dir.path().join(format!("{base}.meta"));
        assert!(train.exists(), "missing {train:?}");
        assert!(test.exists(), "missing {test:?}");
        assert!(meta.exists(), "missing {meta:?}");
        assert_eq!(std::fs::read_to_string(&train).unwrap().lines().count(), 75);
        assert_eq!(std::fs::read_to_string(&test).unwrap().lines().count(), 75);
        let meta_text = std::fs::read_to_string(&meta).unwrap();
        assert!(meta_text.contains("dataset=iris"));
        assert!(meta_text.contains("fraction=0.5"));
        assert!(meta_text.contains("train.Iris-setosa=25"));
    }
    // Different sets hold different splits.
    assert_ne!(
        std::fs::read(dir.path().join("iris-50tra-50tst-set1-train.csv")).unwrap(),
        std::fs::read(dir.path().join("iris-50tra-50tst-set2-train.csv")).unwrap()
    );
}

#[test]
fn make_splits_rejects_bad_fraction_with_usage_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = kants()
        .args(["make-splits"])
        .arg(iris_csv())
        .args(["--fraction", "1.5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("fraction"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = kants().args(["train", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_exits_one_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = kants()
        .args(["train", "definitely-missing.csv", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("definitely-missing.csv"));
}

#[test]
fn train_artifacts_are_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (train_csv, _) = make_iris_split(dir.path());
    let run = |out_dir: &Path| {
        let out = kants()
            .args(["train"])
            .arg(&train_csv)
            .args([
                "--seed",
                "7",
                "--iterations",
                "30",
                "--snapshot-every",
                "10",
                "--out",
            ])
            .arg(out_dir)
            .output()
            .unwrap();
        assert_success(&out);
        stdout(&out)
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let printed = run(&a);
    run(&b);

    for file in ["model.kants", "grid.csv", "history.csv"] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
    assert!(
        printed.contains("compactness ratio:"),
        "summary missing: {printed}"
    );
}

#[test]
fn classify_prints_parsable_accuracy_and_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let (train_csv, test_csv) = make_iris_split(dir.path());
    let out = kants()
        .args(["train"])
        .arg(&train_csv)
        .args(["--seed", "7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_success(&out);

    let out = kants()
        .args(["classify"])
        .arg(dir.path().join("model.kants"))
        .arg(&test_csv)
        .args(["--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_success(&out);
    let text = stdout(&out);
    let accuracy_line = text
        .lines()
        .find(|l| l.starts_with("accuracy: "))
        .unwrap_or_else(|| panic!("no accuracy line in: {text}"));
    let value: f64 = accuracy_line["accuracy: ".len()..].parse().unwrap();
    assert!((0.0..=100.0).contains(&value));
    // Two decimals, e.g. "accuracy: 93.33"
    assert_eq!(accuracy_line.split('.').next_back().unwrap().len(), 2);

    let predictions = std::fs::read_to_string(dir.path().join("predictions.csv")).unwrap();
    let lines: Vec<&str> = predictions.lines().collect();
    assert_eq!(lines[0], "sample_index,true_label,predicted_label,correct");
    assert_eq!(lines.len(), 1 + 15, "one row per test sample");
}

#[test]
fn classify_rejects_mismatched_feature_count() {
    let dir = tempfile::tempdir().unwrap();
    let (train_csv, _) = make_iris_split(dir.path());
    let out = kants()
        .args(["train"])
        .arg(&train_csv)
        .args(["--seed", "7", "--iterations", "10", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_success(&out);

    let bad = dir.path().join("two-features.csv");
    std::fs::write(&bad, "1.0,2.0,labelA\n3.0,4.0,labelB\n").unwrap();
    let out = kants()
        .args(["classify"])
        .arg(dir.path().join("model.kants"))
        .arg(&bad)
        .args(["--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
}

#[test]
fn sweep_writes_grid_of_rows_and_images_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out_dir: &Path| {
        let out = kants()
            .args(["sweep"])
            .arg(iris_csv())
            .args([
                "--betas",
                "1,8",
                "--deltas",
                "0.2,2",
                "--runs",
                "1",
                "--seed",
                "3",
                "--iterations",
                "10",
                "--grid-size",
                "8,8",
                "--out",
            ])
            .arg(out_dir)
            .output()
            .unwrap();
        assert_success(&out);
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&a);
    run(&b);

    let csv = std::fs::read_to_string(a.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "beta,delta,seed,final_ratio,accuracy");
    assert_eq!(lines.len(), 1 + 4, "2x2 grid, one run per point");
    for name in [
        "sweep-b1-d0.2-r1.ppm",
        "sweep-b1-d2-r1.ppm",
        "sweep-b8-d0.2-r1.ppm",
        "sweep-b8-d2-r1.ppm",
    ] {
        assert!(a.join(name).exists(), "missing image {name}");
    }
    assert_eq!(
        std::fs::read(a.join("sweep.csv")).unwrap(),
        std::fs::read(b.join("sweep.csv")).unwrap(),
        "sweep.csv differs between identical invocations"
    );
}

#[test]
fn snapshot_renders_history_frames_byte_stably() {
    let dir = tempfile::tempdir().unwrap();
    let (train_csv, _) = make_iris_split(dir.path());
    let out = kants()
        .args(["train"])
        .arg(&train_csv)
        .args(["--seed", "7", "--snapshot-every", "25", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_success(&out);

    let frames_a = dir.path().join("fa");
    let frames_b = dir.path().join("fb");
    for frames in [&frames_a, &frames_b] {
        let out = kants()
            .args(["snapshot"])
            .arg(dir.path().join("history.csv"))
            .args(["--out"])
            .arg(frames)
            .output()
            .unwrap();
        assert_success(&out);
    }
    for iter in [0, 25, 50, 75, 100] {
        let name = format!("snapshot-iter{iter}.ppm");
        let a = std::fs::read(frames_a.join(&name)).unwrap();
        let b = std::fs::read(frames_b.join(&name)).unwrap();
        assert_eq!(a, b, "{name} not byte-stable");
        assert!(a.starts_with(b"P3\n"), "{name} is not a plain-text PPM");
    }
}

#[test]
fn snapshot_warns_on_empty_history_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let history = dir.path().join("history.csv");
    std::fs::write(
        &history,
        "# kants-history,10,10\niteration,ant_id,label,x,y\n",
    )
    .unwrap();
    let frames = dir.path().join("frames");
    let out = kants()
        .args(["snapshot"])
        .arg(&history)
        .args(["--out"])
        .arg(&frames)
        .output()
        .unwrap();
    assert_success(&out);
    assert!(
        stderr(&out).contains("no frames"),
        "stderr: {}",
        stderr(&out)
    );
    let rendered = std::fs::read_dir(&frames).map(|d| d.count()).unwrap_or(0);
    assert_eq!(rendered, 0, "empty history must render nothing");
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (train_csv, _) = make_iris_split(dir.path());
    let config = dir.path().join("kants.conf");
    std::fs::write(
        &config,
        "# experiment defaults\nbeta = 1.5\niterations = 20\nseed = 11\n",
    )
    .unwrap();

    let out = kants()
        .args(["train"])
        .arg(&train_csv)
        .args(["--config"])
        .arg(&config)
        .args(["--iterations", "40", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_success(&out);

    let model = std::fs::read_to_string(dir.path().join("model.kants")).unwrap();
    assert!(model.contains("beta=1.5"), "config value should apply");
    assert!(model.contains("seed=11"), "config value should apply");
    assert!(model.contains("iterations=40"), "flag should beat config");
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("kants.conf");
    std::fs::write(&config, "betta = 1.5\n").unwrap();
    let out = kants()
        .args(["train", "whatever.csv", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("betta"));
}

#[test]
fn reproduce_prints_full_table_with_knn_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = kants()
        .args(["reproduce"])
        .arg(iris_csv())
        .args([
            "--sets",
            "3",
            "--runs",
            "2",
            "--seed",
            "42",
            "--iterations",
            "30",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_success(&out);
    let text = stdout(&out);
    for name in [
        "iris-50tra-50tst-set1",
        "iris-50tra-50tst-set2",
        "iris-50tra-50tst-set3",
        "iris-90tra-10tst-set1",
        "iris-90tra-10tst-set2",
        "iris-90tra-10tst-set3",
    ] {
        assert!(text.contains(name), "row {name} missing from:\n{text}");
    }
    assert!(text.contains("knn"), "KNN column header missing");

    let csv = std::fs::read_to_string(dir.path().join("reproduce.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6, "header plus six rows");
    assert!(csv.starts_with("split,best,mean,stddev,knn\n"));
}
