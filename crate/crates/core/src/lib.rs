//! Gradient-boosted classification toolkit.
//!
//! The pipeline is: load a labeled feature matrix ([`feature_store`]), keep the
//! K columns with the strongest chi-squared dependence on the label
//! ([`feature_select`]), train a histogram GBDT with gradient-based one-side
//! sampling and exclusive feature bundling ([`gbdt`]), and score it with
//! stratified k-fold cross-validation ([`eval`]).

pub mod error;
pub mod eval;
pub mod feature_select;
pub mod feature_store;
pub mod gbdt;

pub use error::{Error, Result};
pub use feature_store::Dataset;
