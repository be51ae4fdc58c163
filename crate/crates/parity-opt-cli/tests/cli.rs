//! End-to-end subcommand tests against the compiled binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parity-opt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

const TRAIN: &str =
    "score,group\n0.1,a\n0.3,a\n0.5,a\n0.7,a\n0.3,b\n0.5,b\n0.7,b\n0.9,b\n";

#[test]
fn fit_then_threshold_reports_half_for_accuracy() {
    let dir = tempdir();
    let input = write(dir.path(), "train.csv", TRAIN);
    let model = dir.path().join("model.json");
    let out = run(&[
        "fit",
        "--in",
        input.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--grid",
        "64",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let measure = write(dir.path(), "acc.json", r#"{"preset": "accuracy"}"#);
    let report = dir.path().join("report.json");
    let out = run(&[
        "threshold",
        "--model",
        model.to_str().unwrap(),
        "--measure",
        measure.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["theta_star"].as_f64().unwrap(), 0.5);
    assert_eq!(report["branch"], "C2");
    assert_eq!(report["schema"], 1);
}

#[test]
fn evaluate_on_training_data_reproduces_model_metrics() {
    let dir = tempdir();
    let input = write(dir.path(), "train.csv", TRAIN);
    let model_path = dir.path().join("model.json");
    assert!(run(&[
        "fit",
        "--in",
        input.to_str().unwrap(),
        "--out",
        model_path.to_str().unwrap(),
    ])
    .status
    .success());

    let measure = write(dir.path(), "acc.json", r#"{"preset": "accuracy"}"#);
    let out = run(&[
        "evaluate",
        "--model",
        model_path.to_str().unwrap(),
        "--in",
        input.to_str().unwrap(),
        "--measure",
        measure.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();

    // dp gap on the training data is bounded by the rank granularity
    let dp_gap = report["dp_gap"].as_f64().unwrap();
    assert!(dp_gap <= 2.0 / 4.0, "dp_gap = {dp_gap}");
    // fraction outside the training support is zero on the training data
    assert_eq!(report["clamped_fraction"]["a"].as_f64().unwrap(), 0.0);
    // positive rates agree across groups (common rank rule)
    let ra = report["positive_rates"]["a"].as_f64().unwrap();
    let rb = report["positive_rates"]["b"].as_f64().unwrap();
    assert!((ra - rb).abs() <= 2.0 / 4.0);
    // thresholds at rank 1/2 of each group
    assert!((report["group_thresholds"]["a"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert!((report["group_thresholds"]["b"].as_f64().unwrap() - 0.6).abs() < 1e-12);

    // in-library comparison: bit-exact reproduction of the model metrics
    let file: parity_opt_cli::report::ModelFile =
        serde_json::from_str(&fs::read_to_string(&model_path).unwrap()).unwrap();
    let lib_model = parity_opt::FairScoreModel::from_doc(file.doc).unwrap();
    let lib_gap = lib_model.dp_gap(lib_model.grouped()).unwrap();
    assert_eq!(lib_gap, dp_gap);
}

#[test]
fn reduce_unaware_flags_zero_tv() {
    let dir = tempdir();
    let joint = write(
        dir.path(),
        "joint.json",
        r#"{"points": ["a", "b"], "p1": [0.4, 0.6], "p2": [0.4, 0.6],
            "priors": [0.5, 0.5], "eta": [0.8, 0.2]}"#,
    );
    let out_path = dir.path().join("reduce.json");
    let out = run(&[
        "reduce-unaware",
        "--joint",
        joint.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["bayes_everywhere"], true);
    assert_eq!(report["tv"].as_f64().unwrap(), 0.0);
    assert_eq!(report["classifier"][0]["decision"], 1);
    assert_eq!(report["classifier"][1]["decision"], 0);
}

#[test]
fn reduce_unaware_solves_overlapping_joint() {
    let dir = tempdir();
    let joint = write(
        dir.path(),
        "joint.json",
        r#"{"points": ["a", "b", "c"], "p1": [0.5, 0.5, 0.0], "p2": [0.0, 0.5, 0.5],
            "priors": [0.5, 0.5], "eta": [0.9, 0.6, 0.1]}"#,
    );
    let out_path = dir.path().join("reduce.json");
    assert!(run(&[
        "reduce-unaware",
        "--joint",
        joint.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ])
    .status
    .success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["bayes_everywhere"], false);
    assert_eq!(report["tv"].as_f64().unwrap(), 0.5);
    assert_eq!(report["hahn_support_1"][0], "a");
    assert_eq!(report["hahn_support_2"][0], "c");
    assert_eq!(report["bayes_region"][0], "b");
    assert!(report["dp_residual"].as_f64().unwrap() <= 1e-9);
    assert!(report["lambda"].as_array().unwrap().len() == 2);
}

#[test]
fn plot_data_emits_expected_curves() {
    let dir = tempdir();
    let input = write(dir.path(), "train.csv", TRAIN);
    let model = dir.path().join("model.json");
    assert!(run(&[
        "fit",
        "--in",
        input.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ])
    .status
    .success());
    let curves = dir.path().join("curves.csv");
    assert!(run(&[
        "plot-data",
        "--model",
        model.to_str().unwrap(),
        "--out",
        curves.to_str().unwrap(),
    ])
    .status
    .success());
    let text = fs::read_to_string(&curves).unwrap();
    assert!(text.starts_with("curve,x,y"));
    for needle in [
        "cdf_a,",
        "cdf_b,",
        "cdf_barycenter,",
        "gamma_star,",
        "threshold_a,",
        "threshold_b,",
    ] {
        assert!(text.contains(needle), "missing {needle} in:\n{text}");
    }
}

#[test]
fn exit_codes_distinguish_validation_and_io() {
    let dir = tempdir();
    // validation failure: score out of range -> 2
    let bad = write(dir.path(), "bad.csv", "score,group\n1.5,a\n");
    let model = dir.path().join("model.json");
    let out = run(&[
        "fit",
        "--in",
        bad.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // degenerate group -> 2
    let degenerate = write(dir.path(), "deg.csv", "score,group\n0.5,a\n0.5,a\n");
    let out = run(&[
        "fit",
        "--in",
        degenerate.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // invalid measure -> 2
    let input = write(dir.path(), "train.csv", TRAIN);
    assert!(run(&[
        "fit",
        "--in",
        input.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ])
    .status
    .success());
    let bad_measure = write(
        dir.path(),
        "bad-measure.json",
        r#"{"n": [-0.5, -2.0, 1.0], "d": [-1.0, 0.0, 0.0], "label_prior": 0.5}"#,
    );
    let report = dir.path().join("r.json");
    let out = run(&[
        "threshold",
        "--model",
        model.to_str().unwrap(),
        "--measure",
        bad_measure.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // missing input file -> 1
    let out = run(&[
        "fit",
        "--in",
        dir.path().join("nope.csv").to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_is_deterministic() {
    let dir = tempdir();
    let input = write(dir.path(), "train.csv", TRAIN);
    let m1 = dir.path().join("m1.json");
    let m2 = dir.path().join("m2.json");
    for m in [&m1, &m2] {
        assert!(run(&[
            "fit",
            "--in",
            input.to_str().unwrap(),
            "--out",
            m.to_str().unwrap(),
        ])
        .status
        .success());
    }
    assert_eq!(
        fs::read_to_string(&m1).unwrap(),
        fs::read_to_string(&m2).unwrap()
    );
}
