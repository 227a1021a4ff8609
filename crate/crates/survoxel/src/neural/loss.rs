//! Semi-supervised loss over extracted feature vectors: a center-ratio term
//! and cross-entropy for labeled items, class-entropy for unlabeled items,
//! plus the accumulative centroid update and a finite-difference gradient
//! checker for the whole loss.

use super::NeuralError;

/// Guards the center-ratio denominator against a zero sum of distances.
const RATIO_GUARD: f64 = 1e-12;

/// Loss coefficients. `alpha` scales the center-ratio term, `beta` the
/// labeled cross-entropy, `gamma` the unlabeled entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n_classes: usize,
}

impl LossParams {
    /// Default coefficients (0.5, 1, 0.1).
    pub fn new(n_classes: usize) -> Result<Self, NeuralError> {
        Self::with_coefficients(0.5, 1.0, 0.1, n_classes)
    }

    pub fn with_coefficients(
        alpha: f64,
        beta: f64,
        gamma: f64,
        n_classes: usize,
    ) -> Result<Self, NeuralError> {
        if !(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0) {
            return Err(NeuralError::BadParams(format!(
                "coefficients must be non-negative, got ({alpha}, {beta}, {gamma})"
            )));
        }
        if n_classes < 2 {
            return Err(NeuralError::BadParams(format!(
                "n_classes must be >= 2, got {n_classes}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            n_classes,
        })
    }
}

/// Fully connected softmax head: `n_classes` rows of weights plus biases.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxHead {
    weights: Vec<f64>, // row-major n_classes x dim
    bias: Vec<f64>,
    n_classes: usize,
    dim: usize,
}

impl SoftmaxHead {
    pub fn new(
        n_classes: usize,
        dim: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self, NeuralError> {
        if weights.len() != n_classes * dim {
            return Err(NeuralError::ShapeMismatch {
                expected: n_classes * dim,
                got: weights.len(),
            });
        }
        if bias.len() != n_classes {
            return Err(NeuralError::ShapeMismatch {
                expected: n_classes,
                got: bias.len(),
            });
        }
        if weights.iter().chain(bias.iter()).any(|w| !w.is_finite()) {
            return Err(NeuralError::NonFinite("softmax head parameters"));
        }
        Ok(Self {
            weights,
            bias,
            n_classes,
            dim,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.dim..(j + 1) * self.dim]
    }

    fn logits(&self, z: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|j| {
                self.row(j)
                    .iter()
                    .zip(z)
                    .map(|(w, x)| w * x)
                    .sum::<f64>()
                    + self.bias[j]
            })
            .collect()
    }
}

/// Class probabilities `softmax(W z + b)`, computed with max-logit
/// subtraction so large logits cannot overflow.
pub fn softmax_head(z: &[f64], head: &SoftmaxHead) -> Result<Vec<f64>, NeuralError> {
    if z.len() != head.dim {
        return Err(NeuralError::DimMismatch {
            what: "softmax head",
            expected: head.dim,
            got: z.len(),
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(NeuralError::NonFinite("feature vector"));
    }
    Ok(softmax(&head.logits(z)))
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// One batch element: a feature vector, labeled with a class or not.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchItem {
    pub features: Vec<f64>,
    pub label: Option<usize>,
}

impl BatchItem {
    pub fn labeled(features: Vec<f64>, class: usize) -> Self {
        Self {
            features,
            label: Some(class),
        }
    }

    pub fn unlabeled(features: Vec<f64>) -> Self {
        Self {
            features,
            label: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiniBatch {
    pub items: Vec<BatchItem>,
}

impl MiniBatch {
    pub fn new(items: Vec<BatchItem>) -> Result<Self, NeuralError> {
        if items.is_empty() {
            return Err(NeuralError::EmptyBatch);
        }
        Ok(Self { items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Per-class feature centroids with an iteration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids {
    vectors: Vec<Vec<f64>>,
    iteration: u64,
}

impl Centroids {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self, NeuralError> {
        let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
        if vectors.is_empty() || dim == 0 {
            return Err(NeuralError::BadParams("centroids must be non-empty".into()));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(NeuralError::DimMismatch {
                    what: "centroid",
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(NeuralError::NonFinite("centroid"));
            }
        }
        Ok(Self {
            vectors,
            iteration: 0,
        })
    }

    pub fn zeros(n_classes: usize, dim: usize) -> Self {
        Self {
            vectors: vec![vec![0.0; dim]; n_classes],
            iteration: 0,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn class(&self, j: usize) -> &[f64] {
        &self.vectors[j]
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn validate_batch(
    batch: &MiniBatch,
    centroids: &Centroids,
    head: &SoftmaxHead,
    params: &LossParams,
) -> Result<(), NeuralError> {
    if params.n_classes != head.n_classes() {
        return Err(NeuralError::BadParams(format!(
            "params expect {} classes, head has {}",
            params.n_classes,
            head.n_classes()
        )));
    }
    if centroids.n_classes() != params.n_classes {
        return Err(NeuralError::BadParams(format!(
            "centroids cover {} classes, params expect {}",
            centroids.n_classes(),
            params.n_classes
        )));
    }
    if centroids.dim() != head.dim() {
        return Err(NeuralError::DimMismatch {
            what: "centroid",
            expected: head.dim(),
            got: centroids.dim(),
        });
    }
    for item in &batch.items {
        if item.features.len() != head.dim() {
            return Err(NeuralError::DimMismatch {
                what: "batch item",
                expected: head.dim(),
                got: item.features.len(),
            });
        }
        if item.features.iter().any(|v| !v.is_finite()) {
            return Err(NeuralError::NonFinite("batch item features"));
        }
        if let Some(y) = item.label {
            if y >= params.n_classes {
                return Err(NeuralError::BadLabel {
                    label: y,
                    n_classes: params.n_classes,
                });
            }
        }
    }
    Ok(())
}

/// The semi-supervised training loss, averaged over the batch:
///
/// - labeled items contribute the center ratio
///   `alpha * (n-1) * |z - c_y| / sum_{j != y} |z - c_j|`
///   plus the cross-entropy `-beta * log p_y`;
/// - unlabeled items contribute the class entropy
///   `gamma * sum_j (-p_j log p_j)`.
pub fn semisup_loss(
    batch: &MiniBatch,
    centroids: &Centroids,
    head: &SoftmaxHead,
    params: &LossParams,
) -> Result<f64, NeuralError> {
    validate_batch(batch, centroids, head, params)?;
    let n = params.n_classes;
    let mut total = 0.0;
    for item in &batch.items {
        let p = softmax(&head.logits(&item.features));
        match item.label {
            Some(y) => {
                let num = euclidean(&item.features, centroids.class(y));
                let den: f64 = (0..n)
                    .filter(|j| *j != y)
                    .map(|j| euclidean(&item.features, centroids.class(j)))
                    .sum::<f64>()
                    + RATIO_GUARD;
                total += params.alpha * (n - 1) as f64 * num / den;
                total -= params.beta * p[y].max(f64::MIN_POSITIVE).ln();
            }
            None => {
                let entropy: f64 = p
                    .iter()
                    .map(|&pj| if pj > 0.0 { -pj * pj.ln() } else { 0.0 })
                    .sum();
                total += params.gamma * entropy;
            }
        }
    }
    Ok(total / batch.len() as f64)
}

/// Loss value plus the analytic gradient with respect to every item's
/// feature vector (same order as the batch).
pub fn semisup_loss_grad(
    batch: &MiniBatch,
    centroids: &Centroids,
    head: &SoftmaxHead,
    params: &LossParams,
) -> Result<(f64, Vec<Vec<f64>>), NeuralError> {
    validate_batch(batch, centroids, head, params)?;
    let n = params.n_classes;
    let dim = head.dim();
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(batch.len());
    for item in &batch.items {
        let z = &item.features;
        let p = softmax(&head.logits(z));
        let mut g = vec![0.0; dim];
        match item.label {
            Some(y) => {
                // center-ratio term
                let num = euclidean(z, centroids.class(y));
                let den: f64 = (0..n)
                    .filter(|j| *j != y)
                    .map(|j| euclidean(z, centroids.class(j)))
                    .sum::<f64>()
                    + RATIO_GUARD;
                let coef = params.alpha * (n - 1) as f64;
                total += coef * num / den;
                // d/dz [num/den] = u_y/den - num * sum_j u_j / den^2,
                // with u_j the unit vector from c_j to z (zero at coincidence)
                let unit = |c: &[f64]| -> Vec<f64> {
                    let d = euclidean(z, c);
                    if d == 0.0 {
                        vec![0.0; dim]
                    } else {
                        z.iter().zip(c).map(|(a, b)| (a - b) / d).collect()
                    }
                };
                let uy = unit(centroids.class(y));
                let mut usum = vec![0.0; dim];
                for j in (0..n).filter(|j| *j != y) {
                    for (s, u) in usum.iter_mut().zip(unit(centroids.class(j))) {
                        *s += u;
                    }
                }
                for k in 0..dim {
                    g[k] += coef * (uy[k] / den - num * usum[k] / (den * den));
                }
                // cross-entropy term: beta * (W^T p - W_y)
                total -= params.beta * p[y].max(f64::MIN_POSITIVE).ln();
                for (j, &pj) in p.iter().enumerate() {
                    let row = head.row(j);
                    for k in 0..dim {
                        g[k] += params.beta * pj * row[k];
                    }
                }
                let row_y = head.row(y);
                for k in 0..dim {
                    g[k] -= params.beta * row_y[k];
                }
            }
            None => {
                // entropy term: dH/dl_j = -p_j (log p_j + H)
                let entropy: f64 = p
                    .iter()
                    .map(|&pj| if pj > 0.0 { -pj * pj.ln() } else { 0.0 })
                    .sum();
                total += params.gamma * entropy;
                for (j, &pj) in p.iter().enumerate() {
                    if pj <= 0.0 {
                        continue;
                    }
                    let dl = -params.gamma * pj * (pj.ln() + entropy);
                    let row = head.row(j);
                    for k in 0..dim {
                        g[k] += dl * row[k];
                    }
                }
            }
        }
        for gk in &mut g {
            *gk *= scale;
        }
        grads.push(g);
    }
    Ok((total * scale, grads))
}

/// One simultaneous accumulative centroid update:
/// `c_j <- c_j - 0.5 * sum_i [y_i = j] (c_j - z_i) / (1 + count_j)`.
/// Unlabeled items contribute nothing; classes without members are
/// unchanged. Every class residual uses the pre-update centroids.
pub fn update_centroids(
    centroids: &Centroids,
    batch: &MiniBatch,
) -> Result<Centroids, NeuralError> {
    let n = centroids.n_classes();
    let dim = centroids.dim();
    for item in &batch.items {
        if item.features.len() != dim {
            return Err(NeuralError::DimMismatch {
                what: "batch item",
                expected: dim,
                got: item.features.len(),
            });
        }
        if let Some(y) = item.label {
            if y >= n {
                return Err(NeuralError::BadLabel {
                    label: y,
                    n_classes: n,
                });
            }
        }
    }
    let mut vectors = centroids.vectors.clone();
    for (j, c) in vectors.iter_mut().enumerate() {
        let members: Vec<&BatchItem> = batch
            .items
            .iter()
            .filter(|it| it.label == Some(j))
            .collect();
        if members.is_empty() {
            continue;
        }
        let denom = 1.0 + members.len() as f64;
        for k in 0..dim {
            let residual: f64 = members
                .iter()
                .map(|it| centroids.vectors[j][k] - it.features[k])
                .sum();
            c[k] -= 0.5 * residual / denom;
        }
    }
    Ok(Centroids {
        vectors,
        iteration: centroids.iteration + 1,
    })
}

/// Central finite differences of `f` at `x` with step `h` per coordinate.
pub fn central_diff_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>, NeuralError>
where
    F: Fn(&[f64]) -> Result<f64, NeuralError>,
{
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        probe[k] = x[k] + h;
        let up = f(&probe)?;
        probe[k] = x[k] - h;
        let down = f(&probe)?;
        probe[k] = x[k];
        if !up.is_finite() || !down.is_finite() {
            return Err(NeuralError::NonFiniteLoss);
        }
        grad[k] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

/// Max over coordinates of `|analytic - numeric| / max(1e-8, |numeric|)`.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / n.abs().max(1e-8))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub coordinates: usize,
}

/// Checks the analytic gradient of [`semisup_loss`] w.r.t. all feature
/// vectors against central finite differences with step `h`.
pub fn grad_check_semisup(
    batch: &MiniBatch,
    centroids: &Centroids,
    head: &SoftmaxHead,
    params: &LossParams,
    h: f64,
) -> Result<GradCheckReport, NeuralError> {
    let (_, grads) = semisup_loss_grad(batch, centroids, head, params)?;
    let flat_analytic: Vec<f64> = grads.into_iter().flatten().collect();
    let flat_x: Vec<f64> = batch
        .items
        .iter()
        .flat_map(|it| it.features.iter().cloned())
        .collect();
    let dims: Vec<usize> = batch.items.iter().map(|it| it.features.len()).collect();
    let rebuild = |x: &[f64]| -> MiniBatch {
        let mut items = Vec::with_capacity(batch.items.len());
        let mut off = 0;
        for (item, d) in batch.items.iter().zip(&dims) {
            items.push(BatchItem {
                features: x[off..off + d].to_vec(),
                label: item.label,
            });
            off += d;
        }
        MiniBatch { items }
    };
    let numeric = central_diff_gradient(
        |x| semisup_loss(&rebuild(x), centroids, head, params),
        &flat_x,
        h,
    )?;
    Ok(GradCheckReport {
        max_rel_error: max_relative_error(&flat_analytic, &numeric),
        coordinates: flat_x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn head_2x2() -> SoftmaxHead {
        SoftmaxHead::new(2, 2, vec![0.3, -0.2, 0.1, 0.4], vec![0.05, -0.1]).unwrap()
    }

    #[test]
    fn softmax_uniform_for_zero_head() {
        let head = SoftmaxHead::new(3, 2, vec![0.0; 6], vec![0.0; 3]).unwrap();
        let p = softmax_head(&[1.0, -2.0], &head).unwrap();
        for pj in &p {
            assert!((pj - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn softmax_shift_invariance_and_closed_form() {
        let p = softmax(&[3f64.ln(), 0.0]);
        assert!((p[0] - 0.75).abs() < 1e-15);
        assert!((p[1] - 0.25).abs() < 1e-15);
        let q = softmax(&[3f64.ln() + 123.0, 123.0]);
        assert!((p[0] - q[0]).abs() < 1e-12);
        assert!((p[1] - q[1]).abs() < 1e-12);
    }

    #[test]
    fn softmax_rejects_non_finite_input() {
        let head = head_2x2();
        assert!(matches!(
            softmax_head(&[f64::NAN, 0.0], &head),
            Err(NeuralError::NonFinite(_))
        ));
    }

    #[test]
    fn unlabeled_only_batch_with_zero_gamma_is_zero_loss() {
        let head = head_2x2();
        let params = LossParams::with_coefficients(0.5, 1.0, 0.0, 2).unwrap();
        let c = Centroids::zeros(2, 2);
        let batch = MiniBatch::new(vec![
            BatchItem::unlabeled(vec![1.0, 2.0]),
            BatchItem::unlabeled(vec![-1.0, 0.5]),
        ])
        .unwrap();
        assert_eq!(semisup_loss(&batch, &c, &head, &params).unwrap(), 0.0);
    }

    #[test]
    fn perfect_labeled_item_has_vanishing_loss() {
        // z at its centroid, with a head saturating p_y -> 1
        let z = vec![1.0, 0.0];
        let c = Centroids::new(vec![z.clone(), vec![-1.0, 0.0]]).unwrap();
        let head = SoftmaxHead::new(2, 2, vec![30.0, 0.0, -30.0, 0.0], vec![0.0, 0.0]).unwrap();
        let params = LossParams::new(2).unwrap();
        let batch = MiniBatch::new(vec![BatchItem::labeled(z, 0)]).unwrap();
        let loss = semisup_loss(&batch, &c, &head, &params).unwrap();
        assert!(loss.abs() < 1e-6, "loss = {loss}");
    }

    #[test]
    fn fixed_two_sample_batch_matches_scalar_oracle() {
        // one labeled + one unlabeled item with hand-set numbers
        let c = Centroids::new(vec![vec![0.5, 1.0], vec![-1.0, 0.0]]).unwrap();
        let head = head_2x2();
        let params = LossParams::new(2).unwrap();
        let batch = MiniBatch::new(vec![
            BatchItem::labeled(vec![1.0, 2.0], 0),
            BatchItem::unlabeled(vec![-0.5, 0.5]),
        ])
        .unwrap();
        let loss = semisup_loss(&batch, &c, &head, &params).unwrap();

        // independent term-by-term evaluation
        let norm = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        };
        let ratio = norm(&[1.0, 2.0], &[0.5, 1.0]) / (norm(&[1.0, 2.0], &[-1.0, 0.0]) + 1e-12);
        let p_lab = softmax(&[
            0.3 * 1.0 - 0.2 * 2.0 + 0.05,
            0.1 * 1.0 + 0.4 * 2.0 - 0.1,
        ]);
        let p_unl = softmax(&[
            0.3 * -0.5 - 0.2 * 0.5 + 0.05,
            0.1 * -0.5 + 0.4 * 0.5 - 0.1,
        ]);
        let entropy = -p_unl[0] * p_unl[0].ln() - p_unl[1] * p_unl[1].ln();
        let expect = (0.5 * ratio - p_lab[0].ln() + 0.1 * entropy) / 2.0;
        assert!((loss - expect).abs() < 1e-12);
        // frozen from the independent scalar script
        assert!((loss - 0.73602347583419458).abs() < 1e-12);
    }

    #[test]
    fn invalid_label_is_rejected() {
        let c = Centroids::zeros(2, 2);
        let head = head_2x2();
        let params = LossParams::new(2).unwrap();
        let batch = MiniBatch::new(vec![BatchItem::labeled(vec![0.0, 0.0], 2)]).unwrap();
        assert!(matches!(
            semisup_loss(&batch, &c, &head, &params),
            Err(NeuralError::BadLabel { .. })
        ));
    }

    #[test]
    fn centroid_update_formula_and_no_member_classes() {
        let c = Centroids::zeros(2, 2);
        let batch = MiniBatch::new(vec![BatchItem::labeled(vec![1.0, 0.0], 0)]).unwrap();
        let next = update_centroids(&c, &batch).unwrap();
        assert_eq!(next.class(0), &[0.25, 0.0]);
        assert_eq!(next.class(1), &[0.0, 0.0]); // no members: unchanged
        assert_eq!(next.iteration(), 1);
    }

    #[test]
    fn sample_at_centroid_leaves_it_unchanged() {
        let c = Centroids::new(vec![vec![2.0, -1.0], vec![0.0, 0.0]]).unwrap();
        let batch = MiniBatch::new(vec![BatchItem::labeled(vec![2.0, -1.0], 0)]).unwrap();
        let next = update_centroids(&c, &batch).unwrap();
        assert_eq!(next.class(0), c.class(0));
    }

    #[test]
    fn unlabeled_items_do_not_move_centroids() {
        let c = Centroids::new(vec![vec![1.0], vec![-1.0]]).unwrap();
        let batch = MiniBatch::new(vec![
            BatchItem::unlabeled(vec![5.0]),
            BatchItem::unlabeled(vec![-5.0]),
        ])
        .unwrap();
        let next = update_centroids(&c, &batch).unwrap();
        assert_eq!(next.class(0), c.class(0));
        assert_eq!(next.class(1), c.class(1));
        assert_eq!(next.iteration(), 1);
    }

    #[test]
    fn repeated_updates_contract_to_the_sample_point() {
        let mut c = Centroids::new(vec![vec![10.0, -4.0], vec![0.0, 0.0]]).unwrap();
        let m = vec![1.0, 1.0];
        let batch = MiniBatch::new(vec![
            BatchItem::labeled(m.clone(), 0),
            BatchItem::labeled(m.clone(), 0),
        ])
        .unwrap();
        let mut dist = euclidean(c.class(0), &m);
        for _ in 0..50 {
            c = update_centroids(&c, &batch).unwrap();
            let d = euclidean(c.class(0), &m);
            assert!(d < dist || d == 0.0);
            dist = d;
        }
        assert!(dist < 1e-6);
    }

    #[test]
    fn quadratic_gradient_check_is_nearly_exact() {
        // central differences are exact for quadratics up to rounding
        let f = |x: &[f64]| -> Result<f64, NeuralError> {
            Ok(x.iter().map(|v| v * v).sum())
        };
        let x = vec![0.3, -1.2, 2.4];
        let numeric = central_diff_gradient(f, &x, 1e-5).unwrap();
        let analytic: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert!(max_relative_error(&analytic, &numeric) < 1e-8);
    }

    #[test]
    fn semisup_gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 3;
        let dim = 4;
        let head = SoftmaxHead::new(
            n,
            dim,
            (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            (0..n).map(|_| rng.random_range(-0.5..0.5)).collect(),
        )
        .unwrap();
        let centroids = Centroids::new(
            (0..n)
                .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect(),
        )
        .unwrap();
        let params = LossParams::new(n).unwrap();
        let batch = MiniBatch::new(vec![
            BatchItem::labeled((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect(), 1),
            BatchItem::unlabeled((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()),
            BatchItem::labeled((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect(), 0),
        ])
        .unwrap();
        let report = grad_check_semisup(&batch, &centroids, &head, &params, 1e-5).unwrap();
        assert!(report.max_rel_error < 1e-3, "err = {}", report.max_rel_error);
        assert_eq!(report.coordinates, 3 * dim);
    }

    #[test]
    fn entropy_only_gradient_check() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let n = 4;
        let dim = 3;
        let head = SoftmaxHead::new(
            n,
            dim,
            (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            vec![0.0; n],
        )
        .unwrap();
        let centroids = Centroids::zeros(n, dim);
        let params = LossParams::with_coefficients(0.0, 1.0, 0.1, n).unwrap();
        let batch = MiniBatch::new(vec![
            BatchItem::unlabeled(vec![0.4, -1.0, 0.7]),
            BatchItem::unlabeled(vec![1.3, 0.2, -0.6]),
        ])
        .unwrap();
        let report = grad_check_semisup(&batch, &centroids, &head, &params, 1e-5).unwrap();
        assert!(report.max_rel_error < 1e-4, "err = {}", report.max_rel_error);
    }

    #[test]
    fn center_ratio_is_scale_invariant() {
        let z = vec![1.0, 2.0];
        let cvecs = vec![vec![0.5, 1.0], vec![-1.0, 0.0], vec![3.0, -2.0]];
        let params = LossParams::with_coefficients(0.5, 0.0, 0.0, 3).unwrap();
        let head = SoftmaxHead::new(3, 2, vec![0.0; 6], vec![0.0; 3]).unwrap();
        let base = semisup_loss(
            &MiniBatch::new(vec![BatchItem::labeled(z.clone(), 0)]).unwrap(),
            &Centroids::new(cvecs.clone()).unwrap(),
            &head,
            &params,
        )
        .unwrap();
        for s in [0.1, 10.0] {
            let zs: Vec<f64> = z.iter().map(|v| v * s).collect();
            let cs: Vec<Vec<f64>> = cvecs
                .iter()
                .map(|c| c.iter().map(|v| v * s).collect())
                .collect();
            let scaled = semisup_loss(
                &MiniBatch::new(vec![BatchItem::labeled(zs, 0)]).unwrap(),
                &Centroids::new(cs).unwrap(),
                &head,
                &params,
            )
            .unwrap();
            assert!((scaled - base).abs() < 1e-9, "s = {s}: {scaled} vs {base}");
        }
    }

    #[test]
    fn entropy_term_is_bounded_by_log_n() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for n in 2..=5usize {
            let dim = 3;
            let head = SoftmaxHead::new(
                n,
                dim,
                (0..n * dim).map(|_| rng.random_range(-3.0..3.0)).collect(),
                (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            // gamma = 1, single unlabeled item: the loss IS the entropy
            let params = LossParams::with_coefficients(0.0, 0.0, 1.0, n).unwrap();
            let centroids = Centroids::zeros(n, dim);
            for _ in 0..20 {
                let z: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
                let batch = MiniBatch::new(vec![BatchItem::unlabeled(z)]).unwrap();
                let h = semisup_loss(&batch, &centroids, &head, &params).unwrap();
                assert!(h >= 0.0);
                assert!(h <= (n as f64).ln() + 1e-12);
            }
        }
    }

    #[test]
    fn cross_entropy_term_is_non_negative() {
        let head = head_2x2();
        let params = LossParams::with_coefficients(0.0, 1.0, 0.0, 2).unwrap();
        let c = Centroids::zeros(2, 2);
        for z in [[0.0, 0.0], [5.0, -3.0], [-2.0, 2.0]] {
            for y in 0..2 {
                let batch = MiniBatch::new(vec![BatchItem::labeled(z.to_vec(), y)]).unwrap();
                assert!(semisup_loss(&batch, &c, &head, &params).unwrap() >= 0.0);
            }
        }
    }
}
