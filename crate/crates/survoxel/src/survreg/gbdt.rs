//! Gradient-boosted regression trees: squared-error boosting with exact
//! greedy splits over sorted unique thresholds, no stochastic subsampling,
//! so two fits on identical inputs are bit-identical.

use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, RegressionError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbdtConfig {
    pub n_trees: usize,
    /// `None` means unbounded depth.
    pub max_depth: Option<usize>,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: Some(3),
            learning_rate: 0.1,
            min_leaf: 2,
        }
    }
}

impl GbdtConfig {
    fn validate(&self) -> Result<(), RegressionError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(RegressionError::BadConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.min_leaf == 0 {
            return Err(RegressionError::BadConfig("min_leaf must be >= 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(RegressionError::BadConfig(
                "max_depth must be >= 1 (or unbounded)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Squared-error reduction achieved by this split on the training set.
        gain: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub root: TreeNode,
}

impl RegressionTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }
}

/// The fitted additive ensemble. Prediction is
/// `init + learning_rate * sum(tree outputs)`, clamped below at 0 days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GBDTModel {
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    /// Column names the model was fitted on, in training order.
    pub feature_names: Vec<String>,
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn best_split(
    x: &FeatureMatrix,
    residual: &[f64],
    rows: &[usize],
    min_leaf: usize,
    scratch: &mut Vec<(f64, f64)>,
) -> Option<SplitCandidate> {
    let n = rows.len();
    if n < 2 * min_leaf {
        return None;
    }
    let total: f64 = rows.iter().map(|&r| residual[r]).sum();
    let parent_score = total * total / n as f64;
    let mut best: Option<SplitCandidate> = None;
    for f in 0..x.cols() {
        scratch.clear();
        scratch.extend(rows.iter().map(|&r| (x.get(r, f), residual[r])));
        scratch.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut left_sum = 0.0;
        for i in 1..n {
            left_sum += scratch[i - 1].1;
            if scratch[i - 1].0 == scratch[i].0 {
                continue; // no boundary between equal values
            }
            if i < min_leaf || n - i < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / i as f64
                + right_sum * right_sum / (n - i) as f64
                - parent_score;
            // strictly-better keeps the first (lowest feature, lowest
            // threshold) candidate on ties, deterministically
            if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature: f,
                    threshold: 0.5 * (scratch[i - 1].0 + scratch[i].0),
                    gain,
                });
            }
        }
    }
    best
}

fn build_tree(
    x: &FeatureMatrix,
    residual: &[f64],
    rows: Vec<usize>,
    depth_left: Option<usize>,
    min_leaf: usize,
    scratch: &mut Vec<(f64, f64)>,
) -> TreeNode {
    let mean = rows.iter().map(|&r| residual[r]).sum::<f64>() / rows.len() as f64;
    if depth_left == Some(0) {
        return TreeNode::Leaf { value: mean };
    }
    let Some(split) = best_split(x, residual, &rows, min_leaf, scratch) else {
        return TreeNode::Leaf { value: mean };
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&r| x.get(r, split.feature) < split.threshold);
    let next_depth = depth_left.map(|d| d - 1);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        gain: split.gain,
        left: Box::new(build_tree(
            x, residual, left_rows, next_depth, min_leaf, scratch,
        )),
        right: Box::new(build_tree(
            x, residual, right_rows, next_depth, min_leaf, scratch,
        )),
    }
}

pub fn gbdt_fit(
    x: &FeatureMatrix,
    y: &[f64],
    config: &GbdtConfig,
) -> Result<GBDTModel, RegressionError> {
    config.validate()?;
    if x.rows() < 2 {
        return Err(RegressionError::TooFewRows {
            need: 2,
            got: x.rows(),
        });
    }
    if y.len() != x.rows() {
        return Err(RegressionError::LengthMismatch(x.rows(), y.len()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(RegressionError::NonFinite("targets"));
    }
    for r in 0..x.rows() {
        if x.row(r).iter().any(|v| !v.is_finite()) {
            return Err(RegressionError::NonFinite("feature matrix"));
        }
    }

    let n = x.rows();
    let init = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![init; n];
    let mut residual = vec![0.0; n];
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut scratch: Vec<(f64, f64)> = Vec::with_capacity(n);
    for _ in 0..config.n_trees {
        for i in 0..n {
            residual[i] = y[i] - pred[i];
        }
        let root = build_tree(
            x,
            &residual,
            (0..n).collect(),
            config.max_depth,
            config.min_leaf,
            &mut scratch,
        );
        let tree = RegressionTree { root };
        for i in 0..n {
            pred[i] += config.learning_rate * tree.predict(x.row(i));
        }
        trees.push(tree);
    }
    Ok(GBDTModel {
        init,
        learning_rate: config.learning_rate,
        trees,
        feature_names: x.names().to_vec(),
    })
}

/// Predicts survival days for each row. Columns are matched to the model
/// manifest by name (extra columns are ignored, missing ones are an error)
/// and the output is clamped below at 0.
pub fn gbdt_predict(model: &GBDTModel, x: &FeatureMatrix) -> Result<Vec<f64>, RegressionError> {
    let aligned;
    let x = if x.names() == model.feature_names.as_slice() {
        x
    } else {
        aligned = x.select(&model.feature_names)?;
        &aligned
    };
    Ok((0..x.rows())
        .map(|r| {
            let raw: f64 = model.init
                + model.learning_rate
                    * model
                        .trees
                        .iter()
                        .map(|t| t.predict(x.row(r)))
                        .sum::<f64>();
            raw.max(0.0)
        })
        .collect())
}

fn accumulate_importance(node: &TreeNode, scores: &mut [f64]) {
    if let TreeNode::Split {
        feature,
        gain,
        left,
        right,
        ..
    } = node
    {
        scores[*feature] += gain;
        accumulate_importance(left, scores);
        accumulate_importance(right, scores);
    }
}

/// Total squared-error reduction contributed by each feature across every
/// split of every tree, indexed like the model manifest.
pub fn feature_importance(model: &GBDTModel) -> Vec<f64> {
    let mut scores = vec![0.0; model.feature_names.len()];
    for tree in &model.trees {
        accumulate_importance(&tree.root, &mut scores);
    }
    scores
}

/// Indices of the k highest-importance features (ties keep the earlier
/// manifest position). The result is in manifest order.
pub fn select_top_k(importances: &[f64], k: usize) -> Result<Vec<usize>, RegressionError> {
    if k > importances.len() {
        return Err(RegressionError::BadComponentCount {
            k,
            max: importances.len(),
        });
    }
    let mut order: Vec<usize> = (0..importances.len()).collect();
    order.sort_by(|&i, &j| {
        importances[j]
            .partial_cmp(&importances[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut chosen: Vec<usize> = order.into_iter().take(k).collect();
    chosen.sort_unstable();
    Ok(chosen)
}
