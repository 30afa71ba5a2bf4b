//! On-disk model records: a trained embedding classifier as one JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use d2ke::experiment::Standardization;
use d2ke::{Error, LinearModel, Loss, Measure, OmegaSample, Result};

/// Format tag checked on load.
pub const MODEL_FORMAT: &str = "d2ke-model v1";

/// The hyperparameter search that produced a stored model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchRecord {
    pub gamma_grid: Vec<f64>,
    pub r_grid: Vec<usize>,
    pub mu_grid: Vec<f64>,
    pub folds: usize,
    /// Mean validation accuracy of the winning grid point.
    pub cv_accuracy: f64,
}

/// Everything needed to embed and classify new data, plus provenance.
///
/// The landmark sample carries its own seed and distribution spec, so a
/// loaded model reproduces the training-time feature map bitwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SavedModel {
    pub format: String,
    pub crate_version: String,
    pub measure: Measure,
    pub gamma: f64,
    pub mu: f64,
    pub loss: Loss,
    /// Master seed of the training run.
    pub seed: u64,
    /// Original label values indexed by class.
    pub label_map: Vec<i64>,
    /// Per-variable training moments; present only for series data.
    pub standardization: Option<Standardization>,
    pub omegas: OmegaSample,
    pub model: LinearModel,
    pub search: SearchRecord,
}

impl SavedModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("model serialization failed: {e}")))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<SavedModel> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let model: SavedModel = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                msg: format!("unsupported model format `{}`", model.format),
            });
        }
        Ok(model)
    }
}
