//! The `gradcheck` command: verifies the analytic gradient of the
//! semi-supervised loss against central finite differences at seeded random
//! points and exits nonzero above the tolerance.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::neural::{
    grad_check_semisup, BatchItem, Centroids, LossParams, MiniBatch, SoftmaxHead,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-3;
const STEP: f64 = 1e-5;

fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// One seeded random scenario: classes in 2..=4, feature dim in 2..=16,
/// a mixed labeled/unlabeled batch, default loss coefficients.
fn random_scenario(
    rng: &mut ChaCha8Rng,
) -> Result<(MiniBatch, Centroids, SoftmaxHead, LossParams)> {
    let n = rng.random_range(2..=4usize);
    let dim = rng.random_range(2..=16usize);
    let head = SoftmaxHead::new(n, dim, normal_vec(rng, n * dim), normal_vec(rng, n))?;
    let centroids = Centroids::new((0..n).map(|_| normal_vec(rng, dim)).collect())?;
    let params = LossParams::new(n)?;
    let n_items = rng.random_range(2..=4usize);
    let items: Vec<BatchItem> = (0..n_items)
        .map(|i| {
            let features = normal_vec(rng, dim);
            if i == 0 || rng.random_bool(0.5) {
                BatchItem::labeled(features, rng.random_range(0..n))
            } else {
                BatchItem::unlabeled(features)
            }
        })
        .collect();
    Ok((MiniBatch::new(items)?, centroids, head, params))
}

/// Returns the exit code: 0 when the worst relative error over all points
/// is within tolerance, 1 otherwise.
pub fn run(seed: u64, tolerance: f64, points: usize) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..points.max(1) {
        let (batch, centroids, head, params) = random_scenario(&mut rng)?;
        let report = grad_check_semisup(&batch, &centroids, &head, &params, STEP)?;
        println!(
            "point {:>3}: classes={} coords={:>3} max_rel_error={:.3e}",
            i + 1,
            params.n_classes,
            report.coordinates,
            report.max_rel_error
        );
        worst = worst.max(report.max_rel_error);
    }
    println!("gradcheck: max relative error {worst:.3e} (tolerance {tolerance:.3e})");
    Ok(if worst <= tolerance { 0 } else { 1 })
}
