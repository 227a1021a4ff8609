//! Principal component analysis by cyclic Jacobi eigendecomposition of the
//! sample covariance. Wide matrices (cols > rows) go through the Gram
//! matrix instead, which carries the same nonzero spectrum.

use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, RegressionError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PCAModel {
    /// Per-column means removed before projection.
    pub mean: Vec<f64>,
    /// k orthonormal component rows, each of the original column dimension.
    pub components: Vec<Vec<f64>>,
    /// Sample variances along each component, non-increasing.
    pub explained_variance: Vec<f64>,
}

/// Cyclic Jacobi sweeps on a symmetric matrix. Returns eigenpairs sorted by
/// descending eigenvalue; eigenvectors are rows, orthonormal to machine
/// precision.
fn jacobi_symmetric(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if off <= scale * 1e-30 {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[r * n + p];
                        let arq = a[r * n + q];
                        a[r * n + p] = c * arp - s * arq;
                        a[p * n + r] = a[r * n + p];
                        a[r * n + q] = s * arp + c * arq;
                        a[q * n + r] = a[r * n + q];
                    }
                }
                a[p * n + p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q * n + q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].partial_cmp(&a[i * n + i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|r| v[r * n + col]).collect())
        .collect();
    (values, vectors)
}

/// Deterministic sign: the largest-magnitude entry of each component is
/// positive (first such entry on ties).
fn fix_sign(component: &mut [f64]) {
    let mut best = 0usize;
    for (i, v) in component.iter().enumerate() {
        if v.abs() > component[best].abs() {
            best = i;
        }
    }
    if component[best] < 0.0 {
        for v in component.iter_mut() {
            *v = -*v;
        }
    }
}

pub fn pca_fit(x: &FeatureMatrix, k: usize) -> Result<PCAModel, RegressionError> {
    let rows = x.rows();
    let cols = x.cols();
    if rows < 2 {
        return Err(RegressionError::TooFewRows { need: 2, got: rows });
    }
    let max_k = (rows - 1).min(cols);
    if k == 0 || k > max_k {
        return Err(RegressionError::BadComponentCount { k, max: max_k });
    }
    let mean: Vec<f64> = (0..cols)
        .map(|c| x.column(c).sum::<f64>() / rows as f64)
        .collect();
    let centered: Vec<f64> = (0..rows)
        .flat_map(|r| {
            let row = x.row(r);
            let mean = &mean;
            (0..cols).map(move |c| row[c] - mean[c])
        })
        .collect();
    if centered.iter().any(|v| !v.is_finite()) {
        return Err(RegressionError::NonFinite("feature matrix"));
    }
    let denom = (rows - 1) as f64;

    let (mut variances, mut components) = if cols <= rows {
        // covariance route: cols x cols
        let mut cov = vec![0.0; cols * cols];
        for r in 0..rows {
            let row = &centered[r * cols..(r + 1) * cols];
            for i in 0..cols {
                for j in i..cols {
                    cov[i * cols + j] += row[i] * row[j];
                }
            }
        }
        for i in 0..cols {
            for j in i..cols {
                let v = cov[i * cols + j] / denom;
                cov[i * cols + j] = v;
                cov[j * cols + i] = v;
            }
        }
        let (values, vectors) = jacobi_symmetric(cov, cols);
        (values, vectors)
    } else {
        // Gram route: rows x rows, components recovered as X^T v / sqrt((n-1) λ)
        let mut gram = vec![0.0; rows * rows];
        for i in 0..rows {
            for j in i..rows {
                let dot: f64 = (0..cols)
                    .map(|c| centered[i * cols + c] * centered[j * cols + c])
                    .sum();
                gram[i * rows + j] = dot / denom;
                gram[j * rows + i] = gram[i * rows + j];
            }
        }
        let (values, vectors) = jacobi_symmetric(gram, rows);
        let lambda_max = values.first().copied().unwrap_or(0.0).max(0.0);
        let tiny = lambda_max * 1e-12 + f64::MIN_POSITIVE;
        let mut comps = Vec::with_capacity(k);
        for (idx, (lam, v)) in values.iter().zip(&vectors).enumerate().take(k) {
            if *lam <= tiny {
                return Err(RegressionError::RankDeficient { rank: idx, k });
            }
            let norm = (denom * lam).sqrt();
            let comp: Vec<f64> = (0..cols)
                .map(|c| {
                    (0..rows)
                        .map(|r| centered[r * cols + c] * v[r])
                        .sum::<f64>()
                        / norm
                })
                .collect();
            comps.push(comp);
        }
        (values, comps)
    };

    variances.truncate(k);
    components.truncate(k);
    for v in &mut variances {
        *v = v.max(0.0); // clamp eigenvalue rounding noise
    }
    for c in &mut components {
        fix_sign(c);
    }
    Ok(PCAModel {
        mean,
        components,
        explained_variance: variances,
    })
}

/// Projects rows onto the fitted components; output columns are named
/// `pc_1..pc_k`.
pub fn pca_apply(
    x: &FeatureMatrix,
    model: &PCAModel,
) -> Result<FeatureMatrix, RegressionError> {
    if x.cols() != model.mean.len() {
        return Err(RegressionError::ColumnCount {
            expected: model.mean.len(),
            got: x.cols(),
        });
    }
    let k = model.components.len();
    let mut data = Vec::with_capacity(x.rows() * k);
    for r in 0..x.rows() {
        let row = x.row(r);
        for comp in &model.components {
            data.push(
                comp.iter()
                    .zip(row)
                    .zip(&model.mean)
                    .map(|((c, v), m)| c * (v - m))
                    .sum(),
            );
        }
    }
    let names = (1..=k).map(|i| format!("pc_{i}")).collect();
    FeatureMatrix::from_flat(names, x.rows(), data)
}
