//! Score a predicted label map against a reference: region composition,
//! Dice per region, Hausdorff distance, and the volume-weighted dice loss.
//!
//! ```bash
//! cargo run -p survoxel --example segmentation_metrics
//! ```

use survoxel::segmetrics::{
    dice, hausdorff, hausdorff_percentile, region_masks, weighted_dice_loss, DiceWeights,
    ProbMaps,
};
use survoxel::volio::{SegLabelMap, ValueKind, VolumeGrid};

/// A cube of one label inside an empty 24^3 volume.
fn cube_seg(corner: (usize, usize, usize), side: usize, label: f64) -> SegLabelMap {
    let dims = (24, 24, 24);
    let mut data = vec![0.0; dims.0 * dims.1 * dims.2];
    for z in corner.2..corner.2 + side {
        for y in corner.1..corner.1 + side {
            for x in corner.0..corner.0 + side {
                data[x + dims.0 * (y + dims.1 * z)] = label;
            }
        }
    }
    SegLabelMap::new(VolumeGrid::new(dims, (1.0, 1.0, 1.0), ValueKind::Label, data).unwrap())
        .unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = cube_seg((6, 6, 6), 8, 4.0);
    let shifted = cube_seg((8, 6, 6), 8, 4.0); // prediction off by 2 voxels in x

    let gt = region_masks(&truth);
    let pr = region_masks(&shifted);

    for (name, p, g) in [
        ("ET", &pr.et, &gt.et),
        ("WT", &pr.wt, &gt.wt),
        ("TC", &pr.tc, &gt.tc),
    ] {
        let d = dice(&p.mask, &g.mask)?;
        let h = hausdorff(&p.mask, &g.mask)?;
        let h95 = hausdorff_percentile(&p.mask, &g.mask, 95.0)?;
        println!("{name}: dice {d:.4}  hausdorff {h:.2} mm  hd95 {h95:.2} mm");
    }

    // soft loss with the volume-reciprocal class weights
    let weights = DiceWeights::default();
    let perfect = ProbMaps::one_hot(&truth);
    println!(
        "weighted dice loss, perfect prediction: {:.2e}",
        weighted_dice_loss(&perfect, &truth, &weights)?
    );
    let shifted_probs = ProbMaps::one_hot(&shifted);
    println!(
        "weighted dice loss, shifted prediction: {:.4}",
        weighted_dice_loss(&shifted_probs, &truth, &weights)?
    );
    Ok(())
}
