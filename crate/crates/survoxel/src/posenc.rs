//! Position-encoding segmentation features: a label map at the native
//! 155x240x240 (z, y, x) resolution is pooled with a fixed 5x12x12 kernel
//! (stride = kernel, no overlap) into a 12400-value vector that preserves
//! where tumor mass sits in the volume.

use thiserror::Error;

use crate::volio::SegLabelMap;

/// Required grid dims as stored: (nx, ny, nz).
pub const SEG_DIMS: (usize, usize, usize) = (240, 240, 155);
/// Pooling kernel extents per axis: (kx, ky, kz).
pub const KERNEL: (usize, usize, usize) = (12, 12, 5);
/// Pooled grid extents per axis: (ox, oy, oz).
pub const OUT_DIMS: (usize, usize, usize) = (20, 20, 31);
/// Length of the pooled vector: 31 * 20 * 20.
pub const FEATURE_LEN: usize = OUT_DIMS.0 * OUT_DIMS.1 * OUT_DIMS.2;
/// Voxels per pooling block.
pub const BLOCK_VOLUME: usize = KERNEL.0 * KERNEL.1 * KERNEL.2;

#[derive(Debug, Error)]
pub enum PoolError {
    #[error(
        "segmentation dims {0:?} are not the required {SEG_DIMS:?} (x, y, z); \
         inputs padded for inference must be cropped back by the caller"
    )]
    WrongDims((usize, usize, usize)),
}

/// How a block of raw label values {0, 1, 2, 4} is reduced to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoolKind {
    /// Arithmetic mean of the raw labels; preserves volume fractions.
    #[default]
    Mean,
    /// Maximum raw label in the block.
    Max,
}

/// The pooled vector, flattened z-major: index = (z_block * 20 + y_block) * 20 + x_block.
#[derive(Debug, Clone, PartialEq)]
pub struct PosEncFeatures {
    values: Vec<f64>,
}

impl PosEncFeatures {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, zb: usize, yb: usize, xb: usize) -> f64 {
        self.values[(zb * OUT_DIMS.1 + yb) * OUT_DIMS.0 + xb]
    }

    /// Column names for CSV output, in the flattened order.
    pub fn column_names() -> Vec<String> {
        (0..FEATURE_LEN).map(|i| format!("posenc_{i:05}")).collect()
    }
}

/// Mean-pools the label map; see [`pooled_segmentation_with`].
pub fn pooled_segmentation(seg: &SegLabelMap) -> Result<PosEncFeatures, PoolError> {
    pooled_segmentation_with(seg, PoolKind::Mean)
}

/// Pools a 155x240x240 (z, y, x) label map into 31x20x20 blocks. The dims
/// are checked exactly; nothing is resampled or cropped implicitly.
pub fn pooled_segmentation_with(
    seg: &SegLabelMap,
    kind: PoolKind,
) -> Result<PosEncFeatures, PoolError> {
    let grid = seg.grid();
    if grid.dims() != SEG_DIMS {
        return Err(PoolError::WrongDims(grid.dims()));
    }
    let data = grid.data();
    let (nx, ny, _) = SEG_DIMS;
    let mut values = vec![0.0; FEATURE_LEN];
    for zb in 0..OUT_DIMS.2 {
        for yb in 0..OUT_DIMS.1 {
            for xb in 0..OUT_DIMS.0 {
                let mut sum = 0.0;
                let mut max = 0.0f64;
                for dz in 0..KERNEL.2 {
                    let z = zb * KERNEL.2 + dz;
                    for dy in 0..KERNEL.1 {
                        let y = yb * KERNEL.1 + dy;
                        let row = (z * ny + y) * nx + xb * KERNEL.0;
                        for &v in &data[row..row + KERNEL.0] {
                            sum += v;
                            if v > max {
                                max = v;
                            }
                        }
                    }
                }
                values[(zb * OUT_DIMS.1 + yb) * OUT_DIMS.0 + xb] = match kind {
                    PoolKind::Mean => sum / BLOCK_VOLUME as f64,
                    PoolKind::Max => max,
                };
            }
        }
    }
    Ok(PosEncFeatures { values })
}
