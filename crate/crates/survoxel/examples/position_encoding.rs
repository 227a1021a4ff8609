//! Pool a native-resolution label map into the 12400-value position
//! encoding and verify that no label mass is lost by the partition.
//!
//! ```bash
//! cargo run -p survoxel --example position_encoding
//! ```

use survoxel::posenc::{pooled_segmentation, BLOCK_VOLUME, FEATURE_LEN, OUT_DIMS, SEG_DIMS};
use survoxel::volio::{SegLabelMap, ValueKind, VolumeGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = SEG_DIMS.0 * SEG_DIMS.1 * SEG_DIMS.2;
    let mut labels = vec![0.0; n];

    // an enhancing blob (label 4) around (60, 100, 80) and edema (label 2)
    // around (170, 140, 40)
    let idx = |x: usize, y: usize, z: usize| x + SEG_DIMS.0 * (y + SEG_DIMS.1 * z);
    for z in 70..90 {
        for y in 90..110 {
            for x in 50..70 {
                labels[idx(x, y, z)] = 4.0;
            }
        }
    }
    for z in 30..50 {
        for y in 130..150 {
            for x in 160..180 {
                labels[idx(x, y, z)] = 2.0;
            }
        }
    }
    let total: f64 = labels.iter().sum();
    let seg = SegLabelMap::new(VolumeGrid::new(
        SEG_DIMS,
        (1.0, 1.0, 1.0),
        ValueKind::Label,
        labels,
    )?)?;

    let pooled = pooled_segmentation(&seg)?;
    println!(
        "pooled {}x{}x{} volume into {} values ({}x{}x{} blocks of {} voxels)",
        SEG_DIMS.2, SEG_DIMS.1, SEG_DIMS.0, FEATURE_LEN, OUT_DIMS.2, OUT_DIMS.1, OUT_DIMS.0,
        BLOCK_VOLUME
    );

    let active: Vec<(usize, f64)> = pooled
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (i, *v))
        .collect();
    println!("{} blocks carry tumor mass; the five strongest:", active.len());
    let mut strongest = active.clone();
    strongest.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for (i, v) in strongest.iter().take(5) {
        let zb = i / (OUT_DIMS.0 * OUT_DIMS.1);
        let yb = (i / OUT_DIMS.0) % OUT_DIMS.1;
        let xb = i % OUT_DIMS.0;
        println!("  block (z={zb:>2}, y={yb:>2}, x={xb:>2}): mean label {v:.3}");
    }

    // the block means, scaled back by the block volume, recover every label
    let recovered: f64 = pooled
        .values()
        .iter()
        .map(|v| (v * BLOCK_VOLUME as f64).round())
        .sum();
    println!("input label sum {total}, recovered from pooled vector {recovered}");
    assert_eq!(total, recovered);
    Ok(())
}
