//! Per-column z-score normalization. Fit on training data, apply anywhere.

use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, RegressionError};

/// Per-column mean and standard deviation (population convention, 1/N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Stats for a subset of columns, by position.
    pub fn subset(&self, indices: &[usize]) -> NormStats {
        NormStats {
            mean: indices.iter().map(|&i| self.mean[i]).collect(),
            std: indices.iter().map(|&i| self.std[i]).collect(),
        }
    }
}

pub fn normalize_fit(x: &FeatureMatrix) -> Result<NormStats, RegressionError> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(RegressionError::EmptyMatrix);
    }
    let n = x.rows() as f64;
    let mut mean = vec![0.0; x.cols()];
    let mut std = vec![0.0; x.cols()];
    for c in 0..x.cols() {
        let m: f64 = x.column(c).sum::<f64>() / n;
        let var: f64 = x.column(c).map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        mean[c] = m;
        std[c] = var.sqrt();
    }
    Ok(NormStats { mean, std })
}

/// Z-scores every column with the fitted stats; zero-variance columns map
/// to all zeros.
pub fn normalize_apply(
    x: &FeatureMatrix,
    stats: &NormStats,
) -> Result<FeatureMatrix, RegressionError> {
    if stats.mean.len() != x.cols() {
        return Err(RegressionError::ColumnCount {
            expected: stats.mean.len(),
            got: x.cols(),
        });
    }
    let mut data = Vec::with_capacity(x.rows() * x.cols());
    for r in 0..x.rows() {
        for (c, &v) in x.row(r).iter().enumerate() {
            let s = stats.std[c];
            data.push(if s == 0.0 { 0.0 } else { (v - stats.mean[c]) / s });
        }
    }
    FeatureMatrix::from_flat(x.names().to_vec(), x.rows(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let cols = rows[0].len();
        let names = (0..cols).map(|i| format!("f{i}")).collect();
        FeatureMatrix::new(names, rows).unwrap()
    }

    #[test]
    fn transformed_columns_have_zero_mean_unit_std() {
        let x = matrix(vec![
            vec![1.0, 5.0],
            vec![2.0, 5.0],
            vec![3.0, 5.0],
            vec![10.0, 5.0],
        ]);
        let stats = normalize_fit(&x).unwrap();
        let z = normalize_apply(&x, &stats).unwrap();
        for c in 0..2 {
            let m: f64 = z.column(c).sum::<f64>() / 4.0;
            assert!(m.abs() < 1e-10, "column {c} mean {m}");
        }
        // non-constant column: population std 1
        let var: f64 = z.column(0).map(|v| v * v).sum::<f64>() / 4.0;
        assert!((var - 1.0).abs() < 1e-10);
        // constant column maps to zeros
        assert!(z.column(1).all(|v| v == 0.0));
    }

    #[test]
    fn apply_uses_training_stats_not_the_rows_own() {
        let train = matrix(vec![vec![0.0], vec![2.0]]); // mean 1, std 1
        let stats = normalize_fit(&train).unwrap();
        let held_out = matrix(vec![vec![5.0]]);
        let z = normalize_apply(&held_out, &stats).unwrap();
        assert_eq!(z.get(0, 0), 4.0);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let x = FeatureMatrix::new(vec!["a".into()], vec![]).unwrap();
        assert!(matches!(
            normalize_fit(&x),
            Err(RegressionError::EmptyMatrix)
        ));
    }
}
