use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use boostkit::feature_select::{apply_mask, chi2_scores, select_k_best};
use boostkit::feature_store::{load_feature_csv, write_feature_csv};
use boostkit::gbdt::{load_model, predict, save_model, train, BoosterModel};
use boostkit::Dataset;

fn boostkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boostkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

// Cheap deterministic pseudo-noise in [0, 1).
fn noise(i: usize, j: usize) -> f64 {
    let x = ((i * 7919 + j * 104_729 + 13) % 1009) as f64;
    x / 1009.0
}

/// Classes differ in the first `informative` columns; the rest are noise.
fn synthetic(per_class: usize, classes: usize, m: usize, informative: usize) -> Dataset {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for c in 0..classes {
        for r in 0..per_class {
            let i = c * per_class + r;
            for j in 0..m {
                let shift = if j < informative && j % classes == c { 2.0 } else { 0.0 };
                x.push((noise(i, j) * 3.0 + shift).round());
            }
            y.push(c);
        }
    }
    let names = ["covid", "healthy", "other"][..classes].iter().map(|s| s.to_string()).collect();
    Dataset::from_rows(x, m, y, names).unwrap()
}

fn write(dir: &Path, name: &str, ds: &Dataset) -> PathBuf {
    let p = dir.join(name);
    write_feature_csv(ds, &p).unwrap();
    p
}

fn config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn select_with_k_equal_to_width_keeps_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(20, 2, 6, 2));
    let output = dir.path().join("out.csv");
    let scores = dir.path().join("scores.csv");
    ok(&boostkit(&["select", "--input", s(&input), "--k", "6", "--output", s(&output), "--scores", s(&scores)]));
    assert_eq!(std::fs::read(&input).unwrap(), std::fs::read(&output).unwrap());
    let text = std::fs::read_to_string(scores).unwrap();
    assert!(text.starts_with("feature,score\n"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn select_rejects_zero_k() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(10, 2, 4, 2));
    let out = boostkit(&["select", "--input", s(&input), "--k", "0", "--output", s(&dir.path().join("o.csv"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn select_then_train_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synthetic(30, 2, 12, 4);
    let input = write(dir.path(), "in.csv", &ds);
    let selected = dir.path().join("sel.csv");
    let model = dir.path().join("model.json");
    let cfg = config(dir.path(), r#"{"num_iterations": 12, "seed": 4}"#);
    ok(&boostkit(&["select", "--input", s(&input), "--k", "5", "--output", s(&selected)]));
    ok(&boostkit(&["train", "--input", s(&selected), "--config", s(&cfg), "--model-out", s(&model)]));

    let mask = select_k_best(&chi2_scores(&ds).unwrap(), 5).unwrap();
    let reduced = apply_mask(&ds, &mask).unwrap();
    let mut params = boostkit::gbdt::BoosterParams { num_iterations: 12, seed: 4, ..Default::default() };
    params.goss = Some(Default::default());
    let expected = dir.path().join("expected.json");
    save_model(&train(&reduced, &params).unwrap(), &expected).unwrap();
    assert_eq!(std::fs::read(model).unwrap(), std::fs::read(expected).unwrap());
}

#[test]
fn default_config_on_three_classes_gives_750_trees() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(15, 3, 4, 3));
    let model = dir.path().join("model.json");
    let out = boostkit(&["train", "--input", s(&input), "--model-out", s(&model)]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("750 trees"));
    assert_eq!(load_model(&model).unwrap().trees.len(), 750);
}

#[test]
fn partial_config_falls_back_to_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(15, 2, 4, 2));
    let cfg = config(dir.path(), r#"{"num_iterations": 3}"#);
    let model = dir.path().join("model.json");
    ok(&boostkit(&["train", "--input", s(&input), "--config", s(&cfg), "--model-out", s(&model)]));
    let m = load_model(&model).unwrap();
    assert_eq!(m.trees.len(), 3);
    assert_eq!(m.params_echo.max_leaves, 105);
    assert_eq!(m.params_echo.learning_rate, 0.24);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(10, 2, 4, 2));
    let cfg = config(dir.path(), r#"{"num_trees": 3}"#);
    let out = boostkit(&["train", "--input", s(&input), "--config", s(&cfg), "--model-out", s(&dir.path().join("m.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_iterations_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(10, 2, 4, 2));
    let cfg = config(dir.path(), r#"{"num_iterations": 0}"#);
    let out = boostkit(&["train", "--input", s(&input), "--config", s(&cfg), "--model-out", s(&dir.path().join("m.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_class_input_fails_to_train() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "label,a,b\ncovid,1,2\ncovid,3,4\ncovid,0,1\n").unwrap();
    let out = boostkit(&["train", "--input", s(&input), "--model-out", s(&dir.path().join("m.json"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn cv_writes_one_row_per_fold_plus_average() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(25, 2, 8, 4));
    let cfg = config(dir.path(), r#"{"num_iterations": 10, "selection_k": 50}"#);
    let report = dir.path().join("report.json");
    ok(&boostkit(&["cv", "--input", s(&input), "--config", s(&cfg), "--folds", "5", "--report", s(&report)]));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "fold,sensitivity,specificity,precision,f1,accuracy");
    assert_eq!(lines.len(), 7);
    assert!(lines[6].starts_with("average,"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["per_fold"].as_array().unwrap().len(), 5);
    // selection_k above the column count is clamped
    assert_eq!(json["selection_k"], 8);
}

#[test]
fn cv_is_reproducible_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(20, 2, 6, 2));
    let cfg = config(dir.path(), r#"{"num_iterations": 8}"#);
    let run = |name: &str| {
        let report = dir.path().join(name);
        ok(&boostkit(&["cv", "--input", s(&input), "--config", s(&cfg), "--folds", "2", "--seed", "7", "--report", s(&report)]));
        std::fs::read(report).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn too_many_folds_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(20, 2, 4, 2));
    let out = boostkit(&["cv", "--input", s(&input), "--folds", "200", "--report", s(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn holdout_mode_reports_a_single_split() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(30, 2, 6, 3));
    let cfg = config(dir.path(), r#"{"num_iterations": 10}"#);
    let report = dir.path().join("r.json");
    ok(&boostkit(&["cv", "--input", s(&input), "--config", s(&cfg), "--holdout", "0.2", "--report", s(&report)]));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["per_fold"].as_array().unwrap().len(), 1);
    assert_eq!(json["per_fold"][0]["n_test"], 12);
}

#[test]
fn zero_tree_model_predicts_majority_class() {
    let dir = tempfile::tempdir().unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..50 {
        x.extend([noise(i, 0), noise(i, 1)]);
        y.push(usize::from(i >= 10));
    }
    let ds = Dataset::from_rows(x, 2, y, vec!["covid".into(), "healthy".into()]).unwrap();
    let input = write(dir.path(), "in.csv", &ds);
    let model = dir.path().join("m.json");
    let preds = dir.path().join("p.csv");
    let params = boostkit::gbdt::BoosterParams { num_iterations: 1, ..Default::default() };
    let mut m = train(&ds, &params).unwrap();
    m.trees.clear();
    save_model(&m, &model).unwrap();
    ok(&boostkit(&["predict", "--model", s(&model), "--input", s(&input), "--output", s(&preds)]));
    let text = std::fs::read_to_string(preds).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,predicted_label,p_covid,p_healthy"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[1], "healthy");
        assert!((cells[3].parse::<f64>().unwrap() - 0.8).abs() < 1e-12);
    }
}

#[test]
fn separable_data_is_predicted_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let x: Vec<f64> = (0..60).flat_map(|i| [i as f64, noise(i, 3)]).collect();
    let y: Vec<usize> = (0..60).map(|i| usize::from(i >= 30)).collect();
    let ds = Dataset::from_rows(x, 2, y.clone(), vec!["covid".into(), "healthy".into()]).unwrap();
    let input = write(dir.path(), "in.csv", &ds);
    let cfg = config(dir.path(), r#"{"num_iterations": 20, "min_data_in_leaf": 5}"#);
    let model = dir.path().join("m.json");
    let preds = dir.path().join("p.csv");
    ok(&boostkit(&["train", "--input", s(&input), "--config", s(&cfg), "--model-out", s(&model)]));
    ok(&boostkit(&["predict", "--model", s(&model), "--input", s(&input), "--output", s(&preds)]));
    let text = std::fs::read_to_string(&preds).unwrap();
    let got: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    let want: Vec<&str> = y.iter().map(|&c| ["covid", "healthy"][c]).collect();
    assert_eq!(got, want);

    // probabilities in the file match the library call
    let m: BoosterModel = load_model(&model).unwrap();
    let reloaded = load_feature_csv(&input).unwrap();
    let p = predict(&m, reloaded.features(), 2).unwrap();
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').skip(2).map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, p[0]);
}

#[test]
fn predict_rejects_column_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(15, 2, 4, 2));
    let other = write(dir.path(), "other.csv", &synthetic(15, 2, 5, 2));
    let cfg = config(dir.path(), r#"{"num_iterations": 2}"#);
    let model = dir.path().join("m.json");
    ok(&boostkit(&["train", "--input", s(&input), "--config", s(&cfg), "--model-out", s(&model)]));
    let out = boostkit(&["predict", "--model", s(&model), "--input", s(&other), "--output", s(&dir.path().join("p.csv"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn threads_flag_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.csv", &synthetic(20, 3, 6, 3));
    let cfg = config(dir.path(), r#"{"num_iterations": 6}"#);
    let run = |threads: &str, name: &str| {
        let model = dir.path().join(name);
        ok(&boostkit(&["--threads", threads, "train", "--input", s(&input), "--config", s(&cfg), "--model-out", s(&model)]));
        std::fs::read(model).unwrap()
    };
    assert_eq!(run("1", "a.json"), run("4", "b.json"));
}
