//! Univariate chi-squared feature scoring and top-K selection.
//!
//! For a non-negative feature `j`, the observed class mass is
//! `O[c] = Σ_{i: y_i = c} x[i][j]` and the expected mass under independence is
//! `E[c] = (n_c / n) · Σ_i x[i][j]`. The score is `Σ_c (O[c] − E[c])² / E[c]`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_store::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareScores {
    pub scores: Vec<f64>,
}

/// Sorted, distinct feature indices kept by selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    selected: Vec<usize>,
}

impl FeatureMask {
    /// Validates that `selected` is strictly increasing.
    pub fn new(selected: Vec<usize>) -> Result<Self> {
        if selected.is_empty() {
            return Err(Error::Parameter("feature mask is empty".into()));
        }
        if selected.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("feature mask indices must be strictly increasing".into()));
        }
        Ok(FeatureMask { selected })
    }

    pub fn identity(m: usize) -> Self {
        FeatureMask { selected: (0..m).collect() }
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn k(&self) -> usize {
        self.selected.len()
    }
}

pub fn chi2_scores(dataset: &Dataset) -> Result<ChiSquareScores> {
    let n = dataset.n_rows();
    let m = dataset.n_features();
    let n_classes = dataset.n_classes();

    if let Some(pos) = dataset.features().iter().position(|&v| v < 0.0) {
        return Err(Error::Domain {
            row: pos / m,
            column: pos % m,
            value: dataset.features()[pos],
        });
    }

    // observed[c * m + j]
    let mut observed = vec![0.0; n_classes * m];
    for i in 0..n {
        let base = dataset.labels()[i] * m;
        for (o, &x) in observed[base..base + m].iter_mut().zip(dataset.row(i)) {
            *o += x;
        }
    }
    let class_frac: Vec<f64> = dataset.class_counts().iter().map(|&c| c as f64 / n as f64).collect();

    let scores = (0..m)
        .map(|j| {
            let total: f64 = (0..n_classes).map(|c| observed[c * m + j]).sum();
            if total == 0.0 {
                return 0.0;
            }
            (0..n_classes)
                .filter(|&c| class_frac[c] > 0.0)
                .map(|c| {
                    let expected = class_frac[c] * total;
                    let d = observed[c * m + j] - expected;
                    d * d / expected
                })
                .sum()
        })
        .collect();
    Ok(ChiSquareScores { scores })
}

/// Indices of the `k` largest scores, ties broken toward the lower index.
pub fn select_k_best(scores: &ChiSquareScores, k: usize) -> Result<FeatureMask> {
    let m = scores.scores.len();
    if k == 0 || k > m {
        return Err(Error::Parameter(format!("k must lie in [1, {m}], got {k}")));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| scores.scores[b].total_cmp(&scores.scores[a]).then(a.cmp(&b)));
    let mut selected = order[..k].to_vec();
    selected.sort_unstable();
    Ok(FeatureMask { selected })
}

/// Restricts `dataset` to the mask's columns; labels are unchanged.
pub fn apply_mask(dataset: &Dataset, mask: &FeatureMask) -> Result<Dataset> {
    if let Some(&bad) = mask.selected.iter().find(|&&j| j >= dataset.n_features()) {
        return Err(Error::Parameter(format!(
            "mask index {bad} out of range for {} features",
            dataset.n_features()
        )));
    }
    Ok(dataset.project(&mask.selected))
}

/// Writes `feature,score` rows in feature order.
pub fn write_scores_csv(dataset: &Dataset, scores: &ChiSquareScores, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "feature,score")?;
    for (name, s) in dataset.feature_names().iter().zip(&scores.scores) {
        writeln!(out, "{name},{s}")?;
    }
    out.flush()?;
    Ok(())
}
