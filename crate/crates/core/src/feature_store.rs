//! Labeled feature matrices: loading, writing, and fold splitting.
//!
//! The on-disk format is a plain CSV whose first header cell is `label`,
//! followed by one column per feature:
//!
//! ```text
//! label,f0,f1
//! covid,1.5,0
//! healthy,0,2.5
//! ```
//!
//! Labels are mapped to class indices in order of first appearance.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major matrix of `n_rows × n_features` values with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_rows: usize,
    n_features: usize,
    labels: Vec<usize>,
    label_names: Vec<String>,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row-major values, validating every invariant.
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        label_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n_rows = labels.len();
        if n_rows == 0 {
            return Err(Error::Validation("dataset has no rows".into()));
        }
        if n_features == 0 {
            return Err(Error::Validation("dataset has no feature columns".into()));
        }
        if features.len() != n_rows * n_features {
            return Err(Error::Shape {
                expected: format!("{} values ({n_rows} rows × {n_features} features)", n_rows * n_features),
                got: format!("{} values", features.len()),
            });
        }
        if feature_names.len() != n_features {
            return Err(Error::Shape {
                expected: format!("{n_features} feature names"),
                got: format!("{}", feature_names.len()),
            });
        }
        if let Some((row, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= label_names.len()) {
            return Err(Error::Validation(format!(
                "row {row} has label index {label} but only {} label names exist",
                label_names.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite value {} at row {}, column {}",
                features[pos],
                pos / n_features,
                pos % n_features
            )));
        }
        Ok(Dataset {
            features,
            n_rows,
            n_features,
            labels,
            label_names,
            feature_names,
        })
    }

    /// Like [`Dataset::new`] with generated feature names `f0, f1, ...`.
    pub fn from_rows(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let names = (0..n_features).map(|j| format!("f{j}")).collect();
        Dataset::new(features, n_features, labels, label_names, names)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.n_features + feature]
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.value(i, feature)).collect()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of rows carrying each class index.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows `indices` in the given order; label vocabulary is kept whole.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n_rows: indices.len(),
            n_features: self.n_features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            label_names: self.label_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Columns `columns` in the given order.
    pub(crate) fn project(&self, columns: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(self.n_rows * columns.len());
        for i in 0..self.n_rows {
            let row = self.row(i);
            features.extend(columns.iter().map(|&j| row[j]));
        }
        Dataset {
            features,
            n_rows: self.n_rows,
            n_features: columns.len(),
            labels: self.labels.clone(),
            label_names: self.label_names.clone(),
            feature_names: columns.iter().map(|&j| self.feature_names[j].clone()).collect(),
        }
    }
}

/// Reads a feature-matrix CSV.
pub fn load_feature_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(path, e))?,
        None => return Err(Error::Validation(format!("{}: file is empty", path.display()))),
    };
    if header.get(0) != Some("label") {
        return Err(Error::Format {
            path: path.into(),
            line: 1,
            message: "first header cell must be `label`".into(),
        });
    }
    let feature_names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let n_features = feature_names.len();
    if n_features == 0 {
        return Err(Error::Validation(format!("{}: header names no feature columns", path.display())));
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    let mut label_index: HashMap<String, usize> = HashMap::new();

    for rec in records {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != n_features + 1 {
            return Err(Error::Format {
                path: path.into(),
                line,
                message: format!("expected {} cells, found {}", n_features + 1, rec.len()),
            });
        }
        let label = &rec[0];
        let idx = *label_index.entry(label.to_owned()).or_insert_with(|| {
            label_names.push(label.to_owned());
            label_names.len() - 1
        });
        labels.push(idx);
        for (column, cell) in rec.iter().skip(1).enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: path.into(),
                line,
                column: column + 1,
                value: cell.to_owned(),
            })?;
            features.push(value);
        }
    }
    if labels.is_empty() {
        return Err(Error::Validation(format!("{}: no data rows", path.display())));
    }
    Dataset::new(features, n_features, labels, label_names, feature_names)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Format {
            path: path.into(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Writes `dataset` in the format read by [`load_feature_csv`].
///
/// Values are printed in shortest round-trip decimal form, so reloading yields
/// bit-identical features.
pub fn write_feature_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    for name in dataset.label_names.iter().chain(&dataset.feature_names) {
        if name.contains([',', '\n', '\r', '"']) {
            return Err(Error::Validation(format!(
                "name {name:?} contains a character that cannot be written unquoted"
            )));
        }
    }
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "label")?;
    for name in &dataset.feature_names {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for i in 0..dataset.n_rows {
        write!(out, "{}", dataset.label_names[dataset.labels[i]])?;
        for v in dataset.row(i) {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// One train/test partition of the rows of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_id: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Rows of each class, in dataset order.
fn rows_by_class(dataset: &Dataset) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); dataset.n_classes()];
    for (i, &l) in dataset.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    by_class
}

fn complement(n: usize, sorted: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - sorted.len());
    let mut it = sorted.iter().peekable();
    for i in 0..n {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

/// Stratified k-fold split.
///
/// Each class's rows are shuffled with a ChaCha8 generator seeded from `seed`
/// and dealt round-robin into `k` bins. The dealing position carries over from
/// one class to the next so fold sizes stay balanced. Bin `i` is the test set
/// of fold `i`.
pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::Parameter(format!("fold count must be at least 2, got {k}")));
    }
    let by_class = rows_by_class(dataset);
    for (c, rows) in by_class.iter().enumerate() {
        if !rows.is_empty() && rows.len() < k {
            return Err(Error::Stratification {
                class: dataset.label_names[c].clone(),
                count: rows.len(),
                k,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bins = vec![Vec::new(); k];
    let mut next = 0;
    for mut rows in by_class {
        rows.shuffle(&mut rng);
        for row in rows {
            bins[next].push(row);
            next = (next + 1) % k;
        }
    }

    Ok(bins
        .into_iter()
        .enumerate()
        .map(|(fold_id, mut test)| {
            test.sort_unstable();
            FoldSplit {
                fold_id,
                train_indices: complement(dataset.n_rows, &test),
                test_indices: test,
            }
        })
        .collect())
}

/// Single stratified train/test split holding out `fraction` of every class.
pub fn holdout_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<FoldSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Parameter(format!("holdout fraction must lie in (0, 1), got {fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = Vec::new();
    for (c, mut rows) in rows_by_class(dataset).into_iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        rows.shuffle(&mut rng);
        let take = (fraction * rows.len() as f64 + 0.5).floor() as usize;
        if take == 0 || take == rows.len() {
            return Err(Error::Stratification {
                class: dataset.label_names[c].clone(),
                count: rows.len(),
                k: 2,
            });
        }
        test.extend_from_slice(&rows[..take]);
    }
    test.sort_unstable();
    Ok(FoldSplit {
        fold_id: 0,
        train_indices: complement(dataset.n_rows, &test),
        test_indices: test,
    })
}
