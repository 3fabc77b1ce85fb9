//! Confusion matrices, classification metrics and the cross-validation
//! harness.
//!
//! Binary metrics treat one class as positive. Multiclass metrics reduce the
//! matrix one-vs-rest per class and take the unweighted mean of sensitivity,
//! specificity, precision and F1; accuracy is always `trace / total`.
//!
//! A ratio with a zero denominator is reported as 0 and its name is recorded in
//! [`MetricSet::undefined`], so reports never contain NaN.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_select::{apply_mask, chi2_scores, select_k_best};
use crate::feature_store::{holdout_split, stratified_kfold, Dataset, FoldSplit};
use crate::gbdt::{predict_labels, train, BoosterParams};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub label_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(label_names: Vec<String>) -> Self {
        let c = label_names.len();
        ConfusionMatrix {
            label_names,
            counts: vec![vec![0; c]; c],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|c| self.counts[c][c]).sum()
    }

    /// `(tp, fn, fp, tn)` with `positive` against every other class.
    pub fn one_vs_rest(&self, positive: usize) -> (u64, u64, u64, u64) {
        let tp = self.counts[positive][positive];
        let row: u64 = self.counts[positive].iter().sum();
        let col: u64 = self.counts.iter().map(|r| r[positive]).sum();
        let fn_ = row - tp;
        let fp = col - tp;
        (tp, fn_, fp, self.total() - tp - fn_ - fp)
    }

    /// Entrywise sum; both matrices must share the label vocabulary.
    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], c: usize) -> Result<ConfusionMatrix> {
    confusion_matrix_named(y_true, y_pred, (0..c).map(|i| i.to_string()).collect())
}

pub fn confusion_matrix_named(y_true: &[usize], y_pred: &[usize], label_names: Vec<String>) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() || y_true.is_empty() {
        return Err(Error::Shape {
            expected: format!("two equal, non-empty label vectors ({} true labels)", y_true.len()),
            got: format!("{} predictions", y_pred.len()),
        });
    }
    let c = label_names.len();
    if let Some(&bad) = y_true.iter().chain(y_pred).find(|&&l| l >= c) {
        return Err(Error::Shape {
            expected: format!("labels below {c}"),
            got: format!("label {bad}"),
        });
    }
    let mut cm = ConfusionMatrix::zeros(label_names);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

/// Values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Metrics whose denominator was zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

fn ratio(num: u64, den: u64, name: &str, undefined: &mut Vec<String>) -> f64 {
    if den == 0 {
        undefined.push(name.to_owned());
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_score(precision: f64, sensitivity: f64, name: &str, undefined: &mut Vec<String>) -> f64 {
    if precision + sensitivity == 0.0 {
        undefined.push(name.to_owned());
        0.0
    } else {
        2.0 * precision * sensitivity / (precision + sensitivity)
    }
}

fn ovr_metrics(cm: &ConfusionMatrix, positive: usize, suffix: &str) -> MetricSet {
    let (tp, fn_, fp, tn) = cm.one_vs_rest(positive);
    let mut undefined = Vec::new();
    let sensitivity = ratio(tp, tp + fn_, &format!("sensitivity{suffix}"), &mut undefined);
    let specificity = ratio(tn, tn + fp, &format!("specificity{suffix}"), &mut undefined);
    let precision = ratio(tp, tp + fp, &format!("precision{suffix}"), &mut undefined);
    let f1 = f1_score(precision, sensitivity, &format!("f1{suffix}"), &mut undefined);
    MetricSet {
        sensitivity,
        specificity,
        precision,
        f1,
        accuracy: (tp + tn) as f64 / cm.total() as f64,
        undefined,
    }
}

pub fn binary_metrics(cm: &ConfusionMatrix, positive: usize) -> Result<MetricSet> {
    if cm.n_classes() != 2 || positive > 1 {
        return Err(Error::Parameter(format!(
            "binary metrics need a 2×2 matrix and positive class 0 or 1 (got {} classes, positive {positive})",
            cm.n_classes()
        )));
    }
    if cm.total() == 0 {
        return Err(Error::Validation("confusion matrix is empty".into()));
    }
    Ok(ovr_metrics(cm, positive, ""))
}

pub fn multiclass_metrics(cm: &ConfusionMatrix) -> Result<MetricSet> {
    let c = cm.n_classes();
    if c < 2 {
        return Err(Error::Parameter("multiclass metrics need at least 2 classes".into()));
    }
    if cm.total() == 0 {
        return Err(Error::Validation("confusion matrix is empty".into()));
    }
    let per_class: Vec<MetricSet> = (0..c)
        .map(|k| ovr_metrics(cm, k, &format!("[{}]", cm.label_names[k])))
        .collect();
    let mean = |f: fn(&MetricSet) -> f64| per_class.iter().map(f).sum::<f64>() / c as f64;
    Ok(MetricSet {
        sensitivity: mean(|m| m.sensitivity),
        specificity: mean(|m| m.specificity),
        precision: mean(|m| m.precision),
        f1: mean(|m| m.f1),
        accuracy: cm.trace() as f64 / cm.total() as f64,
        undefined: per_class.into_iter().flat_map(|m| m.undefined).collect(),
    })
}

/// Two-class problems use [`binary_metrics`] with class 0 positive; larger
/// vocabularies use [`multiclass_metrics`].
pub fn metrics_for(cm: &ConfusionMatrix) -> Result<MetricSet> {
    if cm.n_classes() == 2 {
        binary_metrics(cm, 0)
    } else {
        multiclass_metrics(cm)
    }
}

fn average(sets: &[MetricSet]) -> MetricSet {
    let n = sets.len() as f64;
    let mean = |f: fn(&MetricSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
    let mut undefined: Vec<String> = Vec::new();
    for s in sets {
        for u in &s.undefined {
            if !undefined.contains(u) {
                undefined.push(u.clone());
            }
        }
    }
    MetricSet {
        sensitivity: mean(|m| m.sensitivity),
        specificity: mean(|m| m.specificity),
        precision: mean(|m| m.precision),
        f1: mean(|m| m.f1),
        accuracy: mean(|m| m.accuracy),
        undefined,
    }
}

/// Anything that can be fit on one fold's training rows and label its test
/// rows.
pub trait FoldClassifier: Sync {
    fn fit_predict(&self, train: &Dataset, test: &Dataset, seed: u64) -> Result<Vec<usize>>;

    /// Configuration recorded in the report.
    fn describe(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

/// The gradient-boosted classifier.
#[derive(Debug, Clone)]
pub struct BoosterClassifier {
    pub params: BoosterParams,
}

impl FoldClassifier for BoosterClassifier {
    fn fit_predict(&self, train_set: &Dataset, test: &Dataset, seed: u64) -> Result<Vec<usize>> {
        let params = BoosterParams { seed, ..self.params.clone() };
        let model = train(train_set, &params)?;
        predict_labels(&model, test.features(), test.n_features())
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::to_value(&self.params).unwrap_or(serde_json::Value::Null)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    /// 1-based.
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: MetricSet,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// `stratified_kfold` or `holdout`.
    pub protocol: String,
    pub folds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holdout_fraction: Option<f64>,
    pub seed: u64,
    pub selection_k: Option<usize>,
    pub params: serde_json::Value,
    pub label_names: Vec<String>,
    /// Positive class of the binary metrics; absent for multiclass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positive_class: Option<String>,
    pub per_fold: Vec<FoldReport>,
    pub average: MetricSet,
    pub pooled_confusion: ConfusionMatrix,
}

/// Seed for the model trained on fold `fold_id`.
pub fn fold_seed(seed: u64, fold_id: usize) -> u64 {
    seed ^ (fold_id as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run_fold(
    dataset: &Dataset,
    classifier: &dyn FoldClassifier,
    selection_k: Option<usize>,
    split: &FoldSplit,
    seed: u64,
) -> Result<FoldReport> {
    let mut train_set = dataset.subset(&split.train_indices);
    let mut test = dataset.subset(&split.test_indices);
    if let Some(k) = selection_k {
        let mask = select_k_best(&chi2_scores(&train_set)?, k)?;
        train_set = apply_mask(&train_set, &mask)?;
        test = apply_mask(&test, &mask)?;
    }
    let predicted = classifier.fit_predict(&train_set, &test, fold_seed(seed, split.fold_id))?;
    let confusion = confusion_matrix_named(test.labels(), &predicted, dataset.label_names().to_vec())?;
    Ok(FoldReport {
        fold: split.fold_id + 1,
        n_train: train_set.n_rows(),
        n_test: test.n_rows(),
        metrics: metrics_for(&confusion)?,
        confusion,
    })
}

fn assemble(
    dataset: &Dataset,
    classifier: &dyn FoldClassifier,
    selection_k: Option<usize>,
    splits: &[FoldSplit],
    seed: u64,
) -> Result<(Vec<FoldReport>, MetricSet, ConfusionMatrix)> {
    let per_fold = splits
        .par_iter()
        .map(|s| run_fold(dataset, classifier, selection_k, s, seed))
        .collect::<Result<Vec<_>>>()?;
    let average = average(&per_fold.iter().map(|f| f.metrics.clone()).collect::<Vec<_>>());
    let mut pooled = ConfusionMatrix::zeros(dataset.label_names().to_vec());
    for f in &per_fold {
        pooled.add(&f.confusion);
    }
    Ok((per_fold, average, pooled))
}

fn positive_class(dataset: &Dataset) -> Option<String> {
    (dataset.n_classes() == 2).then(|| dataset.label_names()[0].clone())
}

/// Stratified k-fold evaluation with any classifier. When `selection_k` is
/// set, chi-squared selection is fit on each fold's training rows only.
pub fn cross_validate_with(
    dataset: &Dataset,
    classifier: &dyn FoldClassifier,
    selection_k: Option<usize>,
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    let splits = stratified_kfold(dataset, folds, seed)?;
    let (per_fold, average, pooled_confusion) = assemble(dataset, classifier, selection_k, &splits, seed)?;
    Ok(CvReport {
        protocol: "stratified_kfold".into(),
        folds,
        holdout_fraction: None,
        seed,
        selection_k,
        params: classifier.describe(),
        label_names: dataset.label_names().to_vec(),
        positive_class: positive_class(dataset),
        per_fold,
        average,
        pooled_confusion,
    })
}

pub fn cross_validate(
    dataset: &Dataset,
    params: &BoosterParams,
    selection_k: Option<usize>,
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    params.validate()?;
    cross_validate_with(dataset, &BoosterClassifier { params: params.clone() }, selection_k, folds, seed)
}

/// Single stratified split holding out `fraction` of each class.
pub fn holdout_evaluate(
    dataset: &Dataset,
    params: &BoosterParams,
    selection_k: Option<usize>,
    fraction: f64,
    seed: u64,
) -> Result<CvReport> {
    params.validate()?;
    let classifier = BoosterClassifier { params: params.clone() };
    let split = holdout_split(dataset, fraction, seed)?;
    let (per_fold, average, pooled_confusion) = assemble(dataset, &classifier, selection_k, &[split], seed)?;
    Ok(CvReport {
        protocol: "holdout".into(),
        folds: 1,
        holdout_fraction: Some(fraction),
        seed,
        selection_k,
        params: classifier.describe(),
        label_names: dataset.label_names().to_vec(),
        positive_class: positive_class(dataset),
        per_fold,
        average,
        pooled_confusion,
    })
}

pub fn write_report_json(report: &CvReport, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// One row per fold followed by an `average` row.
pub fn write_report_csv(report: &CvReport, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "fold,sensitivity,specificity,precision,f1,accuracy")?;
    let row = |out: &mut BufWriter<File>, name: &str, m: &MetricSet| {
        writeln!(out, "{name},{},{},{},{},{}", m.sensitivity, m.specificity, m.precision, m.f1, m.accuracy)
    };
    for f in &report.per_fold {
        row(&mut out, &f.fold.to_string(), &f.metrics)?;
    }
    row(&mut out, "average", &report.average)?;
    out.flush()?;
    Ok(())
}
