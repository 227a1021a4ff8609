//! Survival evaluation: bucketed accuracy, squared-error statistics and
//! Spearman rank correlation.

use serde::{Deserialize, Serialize};

use super::RegressionError;

pub const EVAL_CSV_HEADER: &str = "Accuracy,MSE,medianSE,stdSE,SpearmanR";

/// Survival buckets: short `< short_max`, mid `[short_max, long_min]`
/// (both boundaries inclusive), long `> long_min`. Defaults are the
/// 300/450-day convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalBuckets {
    pub short_max: f64,
    pub long_min: f64,
}

impl Default for SurvivalBuckets {
    fn default() -> Self {
        Self {
            short_max: 300.0,
            long_min: 450.0,
        }
    }
}

impl SurvivalBuckets {
    pub fn new(short_max: f64, long_min: f64) -> Result<Self, RegressionError> {
        if !(short_max <= long_min) {
            return Err(RegressionError::BadBuckets(short_max, long_min));
        }
        Ok(Self {
            short_max,
            long_min,
        })
    }

    pub fn bucket(&self, days: f64) -> u8 {
        if days < self.short_max {
            0
        } else if days <= self.long_min {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub mse: f64,
    pub median_se: f64,
    pub std_se: f64,
    pub spearman_r: f64,
}

impl EvalReport {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.accuracy, self.mse, self.median_se, self.std_se, self.spearman_r
        )
    }
}

/// Average ranks (1-based), ties averaged.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0; // constant ranks carry no ordering information
    }
    cov / (va * vb).sqrt()
}

/// Spearman rank correlation: Pearson correlation of average-ranked values.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Scores predicted against true survival days.
pub fn evaluate(
    y_pred: &[f64],
    y_true: &[f64],
    buckets: &SurvivalBuckets,
) -> Result<EvalReport, RegressionError> {
    if y_pred.len() != y_true.len() {
        return Err(RegressionError::LengthMismatch(y_pred.len(), y_true.len()));
    }
    if y_pred.len() < 2 {
        return Err(RegressionError::TooFewRows {
            need: 2,
            got: y_pred.len(),
        });
    }
    let n = y_pred.len() as f64;
    let matches = y_pred
        .iter()
        .zip(y_true)
        .filter(|(p, t)| buckets.bucket(**p) == buckets.bucket(**t))
        .count();
    let se: Vec<f64> = y_pred
        .iter()
        .zip(y_true)
        .map(|(p, t)| (p - t) * (p - t))
        .collect();
    let mse = se.iter().sum::<f64>() / n;
    let mut sorted = se.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_se = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    // population (1/N) standard deviation of the squared errors
    let std_se = (se.iter().map(|s| (s - mse) * (s - mse)).sum::<f64>() / n).sqrt();
    Ok(EvalReport {
        accuracy: matches as f64 / n,
        mse,
        median_se,
        std_se,
        spearman_r: spearman(y_pred, y_true),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let y = [100.0, 400.0, 600.0, 250.0];
        let r = evaluate(&y, &y, &SurvivalBuckets::default()).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.median_se, 0.0);
        assert_eq!(r.std_se, 0.0);
        assert_eq!(r.spearman_r, 1.0);
    }

    #[test]
    fn decreasing_transform_has_spearman_minus_one() {
        let t = [100.0, 200.0, 300.0, 400.0];
        let p: Vec<f64> = t.iter().map(|v| 1000.0 - v).collect();
        let r = evaluate(&p, &t, &SurvivalBuckets::default()).unwrap();
        assert_eq!(r.spearman_r, -1.0);
    }

    #[test]
    fn hand_bucketed_fixture() {
        // truth buckets: short, mid, long; predictions: short, long, long
        let y_true = [100.0, 400.0, 600.0];
        let y_pred = [250.0, 500.0, 700.0];
        let r = evaluate(&y_pred, &y_true, &SurvivalBuckets::default()).unwrap();
        assert!((r.accuracy - 2.0 / 3.0).abs() < 1e-15);
        // frozen against the bucket-counting script
        assert!((r.mse - 14166.666666666666).abs() < 1e-9);
        assert_eq!(r.median_se, 10000.0);
        assert!((r.std_se - 5892.5565098878951).abs() < 1e-9);
    }

    #[test]
    fn boundary_days_fall_in_the_mid_bucket() {
        let b = SurvivalBuckets::default();
        assert_eq!(b.bucket(299.9999), 0);
        assert_eq!(b.bucket(300.0), 1);
        assert_eq!(b.bucket(450.0), 1);
        assert_eq!(b.bucket(450.0001), 2);
    }

    #[test]
    fn spearman_invariant_under_increasing_transforms() {
        let a = [3.0, 1.0, 4.0, 1.5, 9.0];
        let b = [2.0, 7.0, 1.0, 8.0, 2.5];
        let base = spearman(&a, &b);
        let a2: Vec<f64> = a.iter().map(|v| v.exp()).collect();
        let b2: Vec<f64> = b.iter().map(|v| 3.0 * v + 100.0).collect();
        assert!((spearman(&a2, &b2) - base).abs() < 1e-12);
    }

    #[test]
    fn spearman_handles_ties_with_average_ranks() {
        let ranks = average_ranks(&[10.0, 20.0, 20.0, 30.0]);
        assert_eq!(ranks, vec![1.0, 2.5, 2.5, 4.0]);
        // constant inputs: no ordering information
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(matches!(
            evaluate(&[1.0], &[1.0, 2.0], &SurvivalBuckets::default()),
            Err(RegressionError::LengthMismatch(1, 2))
        ));
        assert!(evaluate(&[1.0], &[1.0], &SurvivalBuckets::default()).is_err());
    }

    #[test]
    fn bad_buckets_are_rejected() {
        assert!(SurvivalBuckets::new(500.0, 300.0).is_err());
        assert!(SurvivalBuckets::new(300.0, 450.0).is_ok());
    }

    #[test]
    fn csv_header_matches_the_reporting_convention() {
        assert_eq!(EVAL_CSV_HEADER, "Accuracy,MSE,medianSE,stdSE,SpearmanR");
    }
}
