//! The semi-supervised loss on a toy 2-class problem: labeled items are
//! pulled toward their class centroid and pushed from the others, unlabeled
//! items are pushed toward confident predictions, and the centroids track
//! the labeled features across iterations.
//!
//! ```bash
//! cargo run -p survoxel --example semisupervised_loss
//! ```

use survoxel::neural::{
    semisup_loss, softmax_head, update_centroids, BatchItem, Centroids, LossParams, MiniBatch,
    SoftmaxHead,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = LossParams::new(2)?; // alpha 0.5, beta 1, gamma 0.1
    let head = SoftmaxHead::new(2, 2, vec![2.0, 0.0, -2.0, 0.0], vec![0.0, 0.0])?;

    // class 0 clusters near (+1, 0), class 1 near (-1, 0)
    let batch = MiniBatch::new(vec![
        BatchItem::labeled(vec![1.1, 0.2], 0),
        BatchItem::labeled(vec![0.9, -0.1], 0),
        BatchItem::labeled(vec![-1.0, 0.3], 1),
        BatchItem::unlabeled(vec![0.8, 0.1]),
        BatchItem::unlabeled(vec![-0.7, -0.2]),
    ])?;

    let p = softmax_head(&[1.1, 0.2], &head)?;
    println!("head prediction for a class-0 item: p = [{:.3}, {:.3}]", p[0], p[1]);

    // centroids start at zero and contract toward the labeled class means
    let mut centroids = Centroids::zeros(2, 2);
    println!("\niter  loss      c0                c1");
    for it in 0..8 {
        let loss = semisup_loss(&batch, &centroids, &head, &params)?;
        println!(
            "{it:>4}  {loss:<8.4}  ({:+.3}, {:+.3})  ({:+.3}, {:+.3})",
            centroids.class(0)[0],
            centroids.class(0)[1],
            centroids.class(1)[0],
            centroids.class(1)[1],
        );
        centroids = update_centroids(&centroids, &batch)?;
    }

    let final_loss = semisup_loss(&batch, &centroids, &head, &params)?;
    println!("\nafter {} updates the loss fell to {final_loss:.4}", centroids.iteration());
    Ok(())
}
