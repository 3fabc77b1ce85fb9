//! Histogram gradient-boosted decision trees with gradient-based one-side
//! sampling (GOSS) and exclusive feature bundling (EFB).

mod binning;
mod booster;
mod efb;
mod goss;
mod model;
pub mod objective;
mod params;
mod tree;

pub use binning::{bin_features, BinMapper, BinnedDesign};
pub use booster::{predict, predict_labels, train, BoosterModel, FORMAT_VERSION};
pub use efb::{efb_bundle, singleton_bundles, BundledDesign, FeatureBundle};
pub use goss::{goss_sample, variance_gain, variance_gain_from_sums, GossSample, SplitPartition};
pub use model::{load_model, save_model};
pub use params::{BoosterParams, GossConfig, Objective, LEAF_LAMBDA};
pub use tree::{best_split, grow_tree, Node, SplitChoice, Tree, TreeContext};
