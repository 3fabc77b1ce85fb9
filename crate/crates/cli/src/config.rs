//! JSON pipeline configuration. Every key is optional; missing keys take the
//! defaults below, unknown keys are rejected.

use std::path::Path;

use boostkit::gbdt::{BoosterParams, GossConfig, Objective};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub learning_rate: f64,
    pub num_iterations: usize,
    pub max_leaves: usize,
    pub max_depth: usize,
    pub min_data_in_leaf: usize,
    pub goss_top_rate: f64,
    pub goss_other_rate: f64,
    pub max_bins: usize,
    pub efb_enabled: bool,
    pub efb_max_conflict: usize,
    /// Inferred from the class count when absent.
    pub objective: Option<Objective>,
    pub selection_k: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let p = BoosterParams::default();
        let goss = GossConfig::default();
        PipelineConfig {
            learning_rate: p.learning_rate,
            num_iterations: p.num_iterations,
            max_leaves: p.max_leaves,
            max_depth: p.max_depth,
            min_data_in_leaf: p.min_data_in_leaf,
            goss_top_rate: goss.top_rate,
            goss_other_rate: goss.other_rate,
            max_bins: p.max_bins,
            efb_enabled: p.efb_enabled,
            efb_max_conflict: p.efb_max_conflict,
            objective: None,
            selection_k: 2000,
            folds: 5,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(PipelineConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn booster_params(&self) -> BoosterParams {
        BoosterParams {
            learning_rate: self.learning_rate,
            num_iterations: self.num_iterations,
            max_leaves: self.max_leaves,
            max_depth: self.max_depth,
            min_data_in_leaf: self.min_data_in_leaf,
            goss: Some(GossConfig {
                top_rate: self.goss_top_rate,
                other_rate: self.goss_other_rate,
            }),
            max_bins: self.max_bins,
            efb_enabled: self.efb_enabled,
            efb_max_conflict: self.efb_max_conflict,
            seed: self.seed,
            objective: self.objective,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_booster_defaults() {
        let c = PipelineConfig::default();
        assert_eq!((c.learning_rate, c.num_iterations, c.max_leaves, c.max_depth, c.min_data_in_leaf), (0.24, 250, 105, 7, 40));
        assert_eq!((c.selection_k, c.folds), (2000, 5));
        assert_eq!(c.booster_params(), BoosterParams::default());
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let c: PipelineConfig = serde_json::from_str(r#"{"num_iterations": 10, "objective": "multiclass_softmax"}"#).unwrap();
        assert_eq!(c.num_iterations, 10);
        assert_eq!(c.objective, Some(Objective::MulticlassSoftmax));
        assert_eq!(c.max_depth, 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<PipelineConfig>(r#"{"learning_rte": 0.1}"#).unwrap_err();
        assert!(err.to_string().contains("learning_rte"));
    }
}
