//! Survival regression: feature matrices, z-score normalization, PCA,
//! gradient-boosted regression trees with split-gain feature importance,
//! model persistence, and the survival evaluation metrics.

mod gbdt;
mod matrix;
mod metrics;
mod model;
mod norm;
mod pca;

pub use gbdt::{
    feature_importance, gbdt_fit, gbdt_predict, select_top_k, GbdtConfig, GBDTModel,
    RegressionTree, TreeNode,
};
pub use matrix::FeatureMatrix;
pub use metrics::{evaluate, spearman, EvalReport, SurvivalBuckets, EVAL_CSV_HEADER};
pub use model::{DeepFeatureBlock, SurvivalModel, MODEL_FORMAT_VERSION};
pub use norm::{normalize_apply, normalize_fit, NormStats};
pub use pca::{pca_apply, pca_fit, PCAModel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("feature matrix must be non-empty")]
    EmptyMatrix,
    #[error("column count mismatch: expected {expected}, got {got}")]
    ColumnCount { expected: usize, got: usize },
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("row length {got} does not match {expected} columns")]
    RaggedRow { expected: usize, got: usize },
    #[error("column {0:?} required by the model is missing")]
    MissingColumn(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("k = {k} out of range: must be in 1..={max} (min(rows-1, cols))")]
    BadComponentCount { k: usize, max: usize },
    #[error("data rank {rank} is too low for {k} principal components")]
    RankDeficient { rank: usize, k: usize },
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("length mismatch: {0} predictions vs {1} targets")]
    LengthMismatch(usize, usize),
    #[error("invalid survival buckets: short_max {0} must be <= long_min {1}")]
    BadBuckets(f64, f64),
    #[error("invalid GBDT config: {0}")]
    BadConfig(String),
    #[error("model format version {got} is not supported (expected {expected})")]
    BadModelVersion { got: u32, expected: u32 },
    #[error("model serialization failed: {0}")]
    Serde(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
