//! JSON model files.

use std::fs;
use std::path::Path;

use super::booster::BoosterModel;
use crate::error::{Error, Result};

/// Writes the model as pretty-printed JSON. Floats use shortest round-trip
/// formatting, so a reloaded model predicts bit-identically.
pub fn save_model(model: &BoosterModel, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(model)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<BoosterModel> {
    let text = fs::read_to_string(path)?;
    let model: BoosterModel = serde_json::from_str(&text).map_err(|e| Error::ModelLoad(e.to_string()))?;
    model.validate()?;
    Ok(model)
}
