//! Versioned JSON persistence for the full survival model: the boosted
//! ensemble, normalization stats, feature manifest, bucket boundaries,
//! and the optional PCA block for externally supplied deep features.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GBDTModel, NormStats, PCAModel, RegressionError, SurvivalBuckets};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// PCA applied to an external deep-feature CSV before the regression
/// features are assembled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepFeatureBlock {
    /// Column names expected in the deep-feature CSV, in order.
    pub input_columns: Vec<String>,
    pub pca: PCAModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalModel {
    pub format_version: u32,
    pub gbdt: GBDTModel,
    /// Stats for the columns in `gbdt.feature_names`, fitted on training data.
    pub norm: NormStats,
    pub buckets: SurvivalBuckets,
    pub deep: Option<DeepFeatureBlock>,
}

impl SurvivalModel {
    pub fn to_json(&self) -> Result<String, RegressionError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self, RegressionError> {
        let model: SurvivalModel = serde_json::from_str(json)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(RegressionError::BadModelVersion {
                got: model.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RegressionError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RegressionError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
