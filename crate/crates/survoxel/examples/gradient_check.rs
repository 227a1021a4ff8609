//! Verify the analytic gradient of the semi-supervised loss against central
//! finite differences, the same harness the `gradcheck` subcommand runs.
//!
//! ```bash
//! cargo run -p survoxel --example gradient_check
//! ```

use survoxel::neural::{
    central_diff_gradient, grad_check_semisup, max_relative_error, semisup_loss_grad, BatchItem,
    Centroids, LossParams, MiniBatch, SoftmaxHead,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a 3-class scenario with hand-set numbers
    let head = SoftmaxHead::new(
        3,
        4,
        vec![
            0.3, -0.2, 0.5, 0.1, //
            -0.4, 0.6, 0.0, 0.2, //
            0.1, 0.1, -0.3, -0.5,
        ],
        vec![0.05, -0.1, 0.0],
    )?;
    let centroids = Centroids::new(vec![
        vec![1.0, 0.0, 0.5, -0.5],
        vec![-1.0, 0.5, 0.0, 0.0],
        vec![0.0, -1.0, 1.0, 0.5],
    ])?;
    let params = LossParams::new(3)?;
    let batch = MiniBatch::new(vec![
        BatchItem::labeled(vec![0.9, 0.1, 0.4, -0.3], 0),
        BatchItem::labeled(vec![-0.8, 0.6, 0.2, 0.1], 1),
        BatchItem::unlabeled(vec![0.2, -0.5, 0.8, 0.3]),
    ])?;

    let (loss, grads) = semisup_loss_grad(&batch, &centroids, &head, &params)?;
    println!("loss = {loss:.6}");
    for (i, g) in grads.iter().enumerate() {
        println!("d loss / d z_{i} = {g:?}");
    }

    let report = grad_check_semisup(&batch, &centroids, &head, &params, 1e-5)?;
    println!(
        "\nfinite-difference check over {} coordinates: max relative error {:.3e}",
        report.coordinates, report.max_rel_error
    );
    assert!(report.max_rel_error < 1e-3);

    // the same harness works for any scalar function of a vector
    let quad = |x: &[f64]| Ok(x.iter().map(|v| v * v).sum::<f64>());
    let x = [0.3, -1.2, 2.4];
    let numeric = central_diff_gradient(quad, &x, 1e-5)?;
    let analytic: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    println!(
        "sanity on |x|^2: max relative error {:.3e}",
        max_relative_error(&analytic, &numeric)
    );
    Ok(())
}
