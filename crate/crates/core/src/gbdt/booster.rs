use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::bin_features;
use super::efb::{efb_bundle, singleton_bundles, BundledDesign};
use super::goss::{goss_sample, GossSample};
use super::objective::{binary_grad_hess, sigmoid, softmax_in_place};
use super::params::{BoosterParams, Objective};
use super::tree::{grow_tree, Tree, TreeContext};
use crate::error::{Error, Result};
use crate::feature_store::Dataset;

pub const FORMAT_VERSION: u32 = 1;

/// A trained ensemble. Trees are stored iteration by iteration; within an
/// iteration there is one tree per raw-score output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoosterModel {
    pub format_version: u32,
    pub objective: Objective,
    pub label_names: Vec<String>,
    /// One entry per raw-score output: the log-odds of class 1 for the binary
    /// objective, the log prior of every class for softmax.
    pub base_scores: Vec<f64>,
    pub feature_count: usize,
    pub params_echo: BoosterParams,
    pub trees: Vec<Tree>,
}

impl BoosterModel {
    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    /// Raw-score outputs per row: 1 for binary, one per class for softmax.
    pub fn n_outputs(&self) -> usize {
        self.base_scores.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::ModelLoad(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let k = self.label_names.len();
        let expected_outputs = match self.objective {
            Objective::BinaryLogistic if k == 2 => 1,
            Objective::BinaryLogistic => {
                return Err(Error::ModelLoad(format!("binary model must have 2 labels, found {k}")))
            }
            Objective::MulticlassSoftmax if k >= 2 => k,
            Objective::MulticlassSoftmax => {
                return Err(Error::ModelLoad(format!("softmax model needs at least 2 labels, found {k}")))
            }
        };
        if self.base_scores.len() != expected_outputs {
            return Err(Error::ModelLoad(format!(
                "expected {expected_outputs} base scores, found {}",
                self.base_scores.len()
            )));
        }
        if self.base_scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::ModelLoad("base scores must be finite".into()));
        }
        if self.feature_count == 0 {
            return Err(Error::ModelLoad("feature_count must be positive".into()));
        }
        for (t, tree) in self.trees.iter().enumerate() {
            if tree.class_index >= expected_outputs {
                return Err(Error::ModelLoad(format!("tree {t} targets output {}", tree.class_index)));
            }
            tree.validate(self.feature_count)
                .map_err(|e| Error::ModelLoad(format!("tree {t}: {e}")))?;
        }
        Ok(())
    }

    fn raw_scores(&self, row: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.base_scores);
        for tree in &self.trees {
            out[tree.class_index] += tree.predict_row(row);
        }
    }
}

fn rng_for(seed: u64, iteration: usize, output: usize, n_outputs: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((iteration * n_outputs + output) as u64);
    rng
}

fn resolve_objective(params: &BoosterParams, n_classes: usize) -> Result<Objective> {
    match params.objective {
        Some(Objective::BinaryLogistic) if n_classes != 2 => Err(Error::Training(format!(
            "binary_logistic needs exactly 2 classes, dataset has {n_classes}"
        ))),
        Some(obj) => Ok(obj),
        None if n_classes == 2 => Ok(Objective::BinaryLogistic),
        None => Ok(Objective::MulticlassSoftmax),
    }
}

/// Fits a booster to `dataset`.
pub fn train(dataset: &Dataset, params: &BoosterParams) -> Result<BoosterModel> {
    params.validate()?;
    let n = dataset.n_rows();
    let counts = dataset.class_counts();
    let present = counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::Training("dataset contains a single class".into()));
    }
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Training(format!("class {:?} has no training rows", dataset.label_names()[c])));
    }
    let objective = resolve_objective(params, dataset.n_classes())?;

    let base_scores: Vec<f64> = match objective {
        Objective::BinaryLogistic => {
            let p = counts[1] as f64 / n as f64;
            vec![(p / (1.0 - p)).ln()]
        }
        Objective::MulticlassSoftmax => counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect(),
    };
    let k = base_scores.len();

    let design = bin_features(dataset, params.max_bins)?;
    let bundles = if params.efb_enabled {
        efb_bundle(&design, params.efb_max_conflict)
    } else {
        singleton_bundles(&design)
    };
    log::debug!("{} features packed into {} bundles", design.n_features(), bundles.len());
    let bundled = BundledDesign::encode(&design, bundles);
    let ctx = TreeContext {
        design: &design,
        bundled: &bundled,
    };

    let labels = dataset.labels();
    let mut scores: Vec<f64> = (0..n).flat_map(|_| base_scores.iter().copied()).collect();
    let mut trees = Vec::with_capacity(params.num_iterations * k);
    let mut grads = vec![vec![0.0; n]; k];
    let mut hess = vec![vec![0.0; n]; k];
    let mut probs = vec![0.0; k];

    for iteration in 0..params.num_iterations {
        for i in 0..n {
            match objective {
                Objective::BinaryLogistic => {
                    let y = if labels[i] == 1 { 1.0 } else { 0.0 };
                    let (g, h) = binary_grad_hess(scores[i], y);
                    grads[0][i] = g;
                    hess[0][i] = h;
                }
                Objective::MulticlassSoftmax => {
                    probs.copy_from_slice(&scores[i * k..(i + 1) * k]);
                    softmax_in_place(&mut probs);
                    for c in 0..k {
                        let p = probs[c];
                        grads[c][i] = p - if labels[i] == c { 1.0 } else { 0.0 };
                        hess[c][i] = p * (1.0 - p);
                    }
                }
            }
        }

        let round: Vec<Tree> = (0..k)
            .into_par_iter()
            .map(|c| {
                let sample = match &params.goss {
                    None => GossSample::all(n),
                    Some(cfg) => goss_sample(&grads[c], cfg, &mut rng_for(params.seed, iteration, c, k)),
                };
                let mut tree = grow_tree(&ctx, &grads[c], &hess[c], &sample, params);
                tree.scale_leaves(params.learning_rate);
                tree.class_index = c;
                tree
            })
            .collect();

        for tree in &round {
            let c = tree.class_index;
            for i in 0..n {
                scores[i * k + c] += tree.predict_row(dataset.row(i));
            }
        }
        trees.extend(round);
    }

    Ok(BoosterModel {
        format_version: FORMAT_VERSION,
        objective,
        label_names: dataset.label_names().to_vec(),
        base_scores,
        feature_count: dataset.n_features(),
        params_echo: params.clone(),
        trees,
    })
}

/// Per-class probabilities for each row of a row-major matrix.
pub fn predict(model: &BoosterModel, features: &[f64], n_features: usize) -> Result<Vec<Vec<f64>>> {
    if n_features != model.feature_count || !features.len().is_multiple_of(n_features.max(1)) {
        return Err(Error::Shape {
            expected: format!("{} feature columns", model.feature_count),
            got: format!("{n_features} columns"),
        });
    }
    let k = model.n_outputs();
    let rows: Vec<&[f64]> = features.chunks(n_features).collect();
    Ok(rows
        .par_iter()
        .map(|row| {
            let mut raw = vec![0.0; k];
            model.raw_scores(row, &mut raw);
            match model.objective {
                Objective::BinaryLogistic => {
                    let p = sigmoid(raw[0]);
                    vec![1.0 - p, p]
                }
                Objective::MulticlassSoftmax => {
                    softmax_in_place(&mut raw);
                    raw
                }
            }
        })
        .collect())
}

/// Most probable class per row; ties go to the lower class index.
pub fn predict_labels(model: &BoosterModel, features: &[f64], n_features: usize) -> Result<Vec<usize>> {
    Ok(predict(model, features, n_features)?.iter().map(|p| argmax(p)).collect())
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prior_model(objective: Objective, base_scores: Vec<f64>, labels: usize) -> BoosterModel {
        BoosterModel {
            format_version: FORMAT_VERSION,
            objective,
            label_names: (0..labels).map(|c| format!("c{c}")).collect(),
            base_scores,
            feature_count: 2,
            params_echo: BoosterParams::default(),
            trees: vec![],
        }
    }

    #[test]
    fn zero_tree_balanced_model_predicts_half() {
        let m = prior_model(Objective::BinaryLogistic, vec![0.0], 2);
        for p in predict(&m, &[1.0, 2.0, 3.0, 4.0], 2).unwrap() {
            assert_eq!(p, [0.5, 0.5]);
        }
    }

    #[test]
    fn zero_tree_model_reproduces_prior() {
        let x: Vec<f64> = (0..625).map(|i| i as f64).collect();
        let labels: Vec<usize> = (0..625).map(|i| usize::from(i >= 125)).collect();
        let ds = Dataset::from_rows(x, 1, labels, vec!["covid".into(), "healthy".into()]).unwrap();
        let mut m = train(&ds, &BoosterParams { num_iterations: 1, ..Default::default() }).unwrap();
        m.trees.clear();
        let p = predict(&m, &[0.0], 1).unwrap();
        assert!((p[0][0] - 0.2).abs() < 1e-12, "{p:?}");
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let m = prior_model(Objective::MulticlassSoftmax, vec![0.3, -2.0, 1.5], 3);
        for p in predict(&m, &[0.0; 10], 2).unwrap() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = prior_model(Objective::BinaryLogistic, vec![0.0], 2);
        assert!(matches!(predict(&m, &[1.0, 2.0, 3.0], 3), Err(Error::Shape { .. })));
    }

    #[test]
    fn single_class_cannot_train() {
        let ds = Dataset::from_rows(vec![1.0, 2.0], 1, vec![0, 0], vec!["a".into()]).unwrap();
        assert!(matches!(train(&ds, &BoosterParams::default()), Err(Error::Training(_))));
        let ds = Dataset::from_rows(vec![1.0, 2.0], 1, vec![0, 0], vec!["a".into(), "b".into()]).unwrap();
        assert!(matches!(train(&ds, &BoosterParams::default()), Err(Error::Training(_))));
    }

    #[test]
    fn binary_objective_rejects_three_classes() {
        let ds = Dataset::from_rows(vec![1.0, 2.0, 3.0], 1, vec![0, 1, 2], vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let p = BoosterParams { objective: Some(Objective::BinaryLogistic), ..Default::default() };
        assert!(matches!(train(&ds, &p), Err(Error::Training(_))));
    }

    #[test]
    fn argmax_prefers_lower_index() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }
}
