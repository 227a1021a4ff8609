//! Synthetic-dataset helpers shared by the integration suites.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use survoxel::volio::{write_nifti, SegLabelMap, ValueKind, VolumeGrid};

pub struct SynthDataset {
    pub seg_dir: PathBuf,
    pub t1ce_dir: PathBuf,
    pub atlas: PathBuf,
    pub metadata: PathBuf,
    pub ids: Vec<String>,
}

pub const FULL_DIMS: (usize, usize, usize) = (240, 240, 155);

/// A label map with a three-layer box tumor (necrosis / enhancing / edema
/// bands along x) whose size and position come from the rng.
pub fn synth_seg(
    rng: &mut ChaCha8Rng,
    dims: (usize, usize, usize),
) -> (SegLabelMap, usize) {
    let n = dims.0 * dims.1 * dims.2;
    let mut labels = vec![0.0; n];
    let max_side = (dims.0.min(dims.1).min(dims.2) / 3).max(3);
    let side = rng.random_range(3..=max_side);
    let cx = rng.random_range(0..dims.0 - side);
    let cy = rng.random_range(0..dims.1 - side);
    let cz = rng.random_range(0..dims.2 - side);
    for z in cz..cz + side {
        for y in cy..cy + side {
            for x in cx..cx + side {
                let band = (x - cx) * 3 / side;
                labels[x + dims.0 * (y + dims.1 * z)] = [1.0, 4.0, 2.0][band.min(2)];
            }
        }
    }
    let grid = VolumeGrid::new(dims, (1.0, 1.0, 1.0), ValueKind::Label, labels).unwrap();
    (SegLabelMap::new(grid).unwrap(), side)
}

/// Writes a complete on-disk dataset: per-subject segmentation and T1ce
/// volumes, an atlas, and the survival metadata CSV. Survival days are a
/// deterministic function of age and tumor size so models have signal.
pub fn write_synth_dataset(
    root: &Path,
    n_subjects: usize,
    dims: (usize, usize, usize),
    seed: u64,
) -> SynthDataset {
    let seg_dir = root.join("seg");
    let t1ce_dir = root.join("t1ce");
    std::fs::create_dir_all(&seg_dir).unwrap();
    std::fs::create_dir_all(&t1ce_dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dims.0 * dims.1 * dims.2;

    // atlas: two parcels split along x
    let atlas_data: Vec<f64> = (0..n)
        .map(|i| if i % dims.0 < dims.0 / 2 { 7.0 } else { 21.0 })
        .collect();
    let atlas_grid = VolumeGrid::new(dims, (1.0, 1.0, 1.0), ValueKind::Atlas, atlas_data).unwrap();
    let atlas = root.join("atlas.nii.gz");
    write_nifti(&atlas_grid, &atlas).unwrap();

    // T1ce: brain everywhere except a thin zero margin, written once and
    // reused for every subject
    let t1ce_data: Vec<f64> = (0..n)
        .map(|i| {
            let x = i % dims.0;
            if x == 0 {
                0.0
            } else {
                ((i % 200) + 1) as f64
            }
        })
        .collect();
    let t1ce_grid =
        VolumeGrid::new(dims, (1.0, 1.0, 1.0), ValueKind::Intensity, t1ce_data).unwrap();

    let metadata = root.join("metadata.csv");
    let mut meta = String::from("BraTS19ID,Age,Survival_days,ResectionStatus\n");
    let mut ids = Vec::new();
    for i in 0..n_subjects {
        let id = format!("subj-{i:02}");
        let (seg, side) = synth_seg(&mut rng, dims);
        write_nifti(seg.grid(), seg_dir.join(format!("{id}_seg.nii.gz"))).unwrap();
        write_nifti_u8(&t1ce_grid, &t1ce_dir.join(format!("{id}_t1ce.nii.gz")));
        let age: f64 = rng.random_range(35.0..80.0);
        let survival = (1400.0 - 10.0 * age - (side as f64).powi(2)).max(25.0);
        let resection = ["GTR", "STR", "NA"][i % 3];
        meta.push_str(&format!("{id},{age:.1},{survival:.1},{resection}\n"));
        ids.push(id);
    }
    std::fs::write(&metadata, meta).unwrap();
    SynthDataset {
        seg_dir,
        t1ce_dir,
        atlas,
        metadata,
        ids,
    }
}

fn write_nifti_u8(grid: &VolumeGrid, path: &Path) {
    survoxel::volio::write_nifti_as(grid, path, survoxel::volio::DataType::U8).unwrap();
}
