//! End-to-end runs of the `locomode` binary: exit codes, produced files, and
//! the reproducibility contract of the subcommands.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn locomode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locomode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_arg(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn full_cli_chain_runs_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // small corpus and short run keep this test quick
    let cfg_path = root.join("config.txt");
    std::fs::write(&cfg_path, "blocks_per_class = 6\nepochs = 8\nseed = 11\n").unwrap();
    let cfg = path_arg(&cfg_path);

    let data = root.join("data");
    let out = locomode(&["gen-synthetic", "--config", &cfg, "--out", &path_arg(&data)]);
    assert!(out.status.success(), "gen-synthetic failed: {out:?}");
    assert!(data.join("run_config.txt").exists());

    let manifests: Vec<String> = ["hip", "bag", "torso"]
        .iter()
        .map(|p| path_arg(&data.join(p).join("manifest.txt")))
        .collect();
    let proc_dir = root.join("proc");
    let out = locomode(&[
        "preprocess",
        "--config",
        &cfg,
        "--manifest",
        &manifests[0],
        "--manifest",
        &manifests[1],
        "--manifest",
        &manifests[2],
        "--val-manifest",
        &path_arg(&data.join("hand_val").join("manifest.txt")),
        "--test-manifest",
        &path_arg(&data.join("hand_test").join("manifest.txt")),
        "--out",
        &path_arg(&proc_dir),
    ]);
    assert!(out.status.success(), "preprocess failed: {out:?}");
    for f in [
        "train.mnds",
        "val.mnds",
        "test.mnds",
        "normalizer.txt",
        "run_config.txt",
    ] {
        assert!(proc_dir.join(f).exists(), "missing {f}");
    }

    let run = |tag: &str| -> PathBuf {
        let run_dir = root.join(tag);
        let out = locomode(&[
            "train",
            "--config",
            &cfg,
            "--dataset",
            &path_arg(&proc_dir.join("train.mnds")),
            "--val-dataset",
            &path_arg(&proc_dir.join("val.mnds")),
            "--out",
            &path_arg(&run_dir),
        ]);
        assert!(out.status.success(), "train failed: {out:?}");
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(
            stdout.contains("best epoch"),
            "no best-epoch line: {stdout}"
        );
        run_dir
    };
    let run_a = run("run_a");
    let run_b = run("run_b");

    // history rows == epochs; identical-seed runs agree byte for byte
    let history = std::fs::read_to_string(run_a.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 1 + 8);
    assert_eq!(
        std::fs::read(run_a.join("history.csv")).unwrap(),
        std::fs::read(run_b.join("history.csv")).unwrap()
    );
    assert!(run_a.join("ckpt_best.bin").exists());

    let eval_dir = root.join("eval");
    let out = locomode(&[
        "evaluate",
        "--checkpoint",
        &path_arg(&run_a.join("ckpt_best.bin")),
        "--dataset",
        &path_arg(&proc_dir.join("test.mnds")),
        "--out",
        &path_arg(&eval_dir),
    ]);
    assert!(out.status.success(), "evaluate failed: {out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("accuracy"), "no metrics line: {stdout}");
    for f in [
        "report.csv",
        "confusion.csv",
        "predictions.txt",
        "pred_histogram.csv",
    ] {
        assert!(eval_dir.join(f).exists(), "missing {f}");
    }

    // one prediction line per test sample (6 blocks × 8 classes)
    let preds = std::fs::read_to_string(eval_dir.join("predictions.txt")).unwrap();
    assert_eq!(preds.lines().count(), 48);
}

#[test]
fn table2_check_prints_all_three_figures() {
    let out = locomode(&["table2-check"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("accuracy"));
    assert!(stdout.contains("macro_f1"));
    assert!(stdout.contains("weighted_f1"));
    assert!(stdout.contains("0.63686"));
}

#[test]
fn missing_manifest_exits_nonzero_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let out = locomode(&[
        "preprocess",
        "--manifest",
        "/nonexistent/manifest.txt",
        "--out",
        &path_arg(&dir.path().join("out")),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("/nonexistent/manifest.txt"),
        "error lacks file context: {stderr}"
    );
}

#[test]
fn evaluate_rejects_architecture_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // checkpoint with feature_dim 6 vs dataset with feature_dim 100
    let arch = locomode::nn::ModelArch {
        feature_dim: 6,
        ..locomode::nn::ModelArch::default()
    };
    let params = locomode::nn::init_params(&arch, 1).unwrap();
    let ckpt = root.join("d6.bin");
    locomode::nn::save_checkpoint(&params, &ckpt).unwrap();

    let samples = vec![locomode::WindowSample {
        features: ndarray::Array2::zeros((5, 100)),
        label: locomode::Label::Still,
        source_position: None,
    }];
    let ds = locomode::Dataset::new(samples, locomode::Split::Test, 5, 100).unwrap();
    let ds_path = root.join("d100.mnds");
    locomode::pipeline::write_dataset(&ds, &ds_path).unwrap();

    let out = locomode(&[
        "evaluate",
        "--checkpoint",
        &path_arg(&ckpt),
        "--dataset",
        &path_arg(&ds_path),
        "--out",
        &path_arg(&root.join("out")),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("architecture mismatch"),
        "unexpected error: {stderr}"
    );
}

#[test]
fn gen_synthetic_rejects_zero_blocks_per_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = locomode(&[
        "gen-synthetic",
        "--out",
        &path_arg(&dir.path().join("data")),
        "--blocks-per-class",
        "0",
    ]);
    assert!(!out.status.success());
}
