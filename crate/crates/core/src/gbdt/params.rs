use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// L2 term added to the hessian sum in leaf values.
pub const LEAF_LAMBDA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    BinaryLogistic,
    MulticlassSoftmax,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::BinaryLogistic => "binary_logistic",
            Objective::MulticlassSoftmax => "multiclass_softmax",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary_logistic" => Ok(Objective::BinaryLogistic),
            "multiclass_softmax" => Ok(Objective::MulticlassSoftmax),
            other => Err(Error::Parameter(format!(
                "unknown objective {other:?}; expected binary_logistic or multiclass_softmax"
            ))),
        }
    }
}

/// Keep the `top_rate` fraction of rows with the largest |gradient| and a
/// uniform `other_rate` fraction (of all rows) from the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GossConfig {
    pub top_rate: f64,
    pub other_rate: f64,
}

impl GossConfig {
    pub fn new(top_rate: f64, other_rate: f64) -> Result<Self> {
        let cfg = GossConfig { top_rate, other_rate };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.top_rate, self.other_rate);
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::Parameter(format!("GOSS rates must lie in [0, 1], got a={a}, b={b}")));
        }
        if a + b > 1.0 + 1e-12 {
            return Err(Error::Parameter(format!("GOSS rates must satisfy a + b <= 1, got a={a}, b={b}")));
        }
        if a < 1.0 && b <= 0.0 {
            return Err(Error::Parameter("GOSS other_rate must be positive when top_rate < 1".into()));
        }
        Ok(())
    }

    /// Amplification `(1 − a) / b` applied to the randomly sampled rows.
    pub fn amplification(&self) -> f64 {
        if self.other_rate > 0.0 {
            (1.0 - self.top_rate) / self.other_rate
        } else {
            1.0
        }
    }
}

impl Default for GossConfig {
    fn default() -> Self {
        GossConfig { top_rate: 0.2, other_rate: 0.1 }
    }
}

/// Booster hyperparameters. `Default` gives learning rate 0.24, 250
/// iterations, 105 leaves, depth 7 and at least 40 rows per leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoosterParams {
    pub learning_rate: f64,
    pub num_iterations: usize,
    pub max_leaves: usize,
    pub max_depth: usize,
    pub min_data_in_leaf: usize,
    /// `None` trains every tree on all rows.
    pub goss: Option<GossConfig>,
    pub max_bins: usize,
    pub efb_enabled: bool,
    pub efb_max_conflict: usize,
    pub seed: u64,
    /// `None` picks binary for two classes and softmax otherwise.
    pub objective: Option<Objective>,
}

impl Default for BoosterParams {
    fn default() -> Self {
        BoosterParams {
            learning_rate: 0.24,
            num_iterations: 250,
            max_leaves: 105,
            max_depth: 7,
            min_data_in_leaf: 40,
            goss: Some(GossConfig::default()),
            max_bins: 255,
            efb_enabled: true,
            efb_max_conflict: 0,
            seed: 0,
            objective: None,
        }
    }
}

impl BoosterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Parameter(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if self.num_iterations == 0 {
            return Err(Error::Parameter("num_iterations must be at least 1".into()));
        }
        if self.max_leaves < 2 {
            return Err(Error::Parameter(format!("max_leaves must be at least 2, got {}", self.max_leaves)));
        }
        if self.max_depth == 0 {
            return Err(Error::Parameter("max_depth must be at least 1".into()));
        }
        if self.min_data_in_leaf == 0 {
            return Err(Error::Parameter("min_data_in_leaf must be at least 1".into()));
        }
        if !(2..=256).contains(&self.max_bins) {
            return Err(Error::Parameter(format!("max_bins must lie in [2, 256], got {}", self.max_bins)));
        }
        if let Some(goss) = &self.goss {
            goss.validate()?;
        }
        Ok(())
    }
}
