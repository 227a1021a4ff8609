//! Segmentation quality metrics: BraTS region composition, Dice overlap,
//! volume-weighted soft dice loss, and Hausdorff distance in millimetres.

use thiserror::Error;

use crate::volio::SegLabelMap;

/// Smoothing constant for the soft dice terms; keeps absent classes at a
/// perfect score instead of 0/0.
pub const SOFT_DICE_EPS: f64 = 1e-5;

/// Default per-class dice weights (necrosis, edema, enhancing): the
/// reciprocal-volume weighting triple.
pub const DEFAULT_DICE_WEIGHTS: (f64, f64, f64) = (0.38, 0.15, 0.47);

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("mask dims differ: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("mask length {got} does not match dims {dims:?}")]
    MaskLength {
        dims: (usize, usize, usize),
        got: usize,
    },
    #[error("mask spacings differ: {0:?} vs {1:?}")]
    SpacingMismatch((f64, f64, f64), (f64, f64, f64)),
    #[error("hausdorff distance is undefined for an empty mask")]
    EmptyMask,
    #[error("invalid probability maps: {0}")]
    InvalidProbMaps(String),
    #[error("invalid dice weights: {0}")]
    InvalidWeights(String),
    #[error("percentile must be in (0, 100], got {0}")]
    BadPercentile(f64),
}

/// Tumor sub-regions and their BraTS compositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Enhancing tumor: label 4.
    Et,
    /// Whole tumor: labels 1, 2 and 4.
    Wt,
    /// Tumor core: labels 1 and 4.
    Tc,
    /// Label 1 alone.
    Necrosis,
    /// Label 2 alone.
    Edema,
    /// Label 4 alone.
    Enhancing,
}

impl Region {
    pub fn contains_label(self, label: f64) -> bool {
        match self {
            Region::Et | Region::Enhancing => label == 4.0,
            Region::Wt => label == 1.0 || label == 2.0 || label == 4.0,
            Region::Tc => label == 1.0 || label == 4.0,
            Region::Necrosis => label == 1.0,
            Region::Edema => label == 2.0,
        }
    }
}

/// A binary volume with the dims/spacing of its source grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    mask: Vec<bool>,
}

impl BinaryMask {
    pub fn new(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        mask: Vec<bool>,
    ) -> Result<Self, MetricError> {
        if mask.len() != dims.0 * dims.1 * dims.2 {
            return Err(MetricError::MaskLength {
                dims,
                got: mask.len(),
            });
        }
        Ok(Self { dims, spacing, mask })
    }

    /// Foreground = voxels where `pred` holds.
    pub fn from_grid(grid: &crate::volio::VolumeGrid, pred: impl Fn(f64) -> bool) -> Self {
        Self {
            dims: grid.dims(),
            spacing: grid.spacing(),
            mask: grid.data().iter().map(|&v| pred(v)).collect(),
        }
    }

    /// Brain-style mask: every nonzero voxel is foreground.
    pub fn from_nonzero(grid: &crate::volio::VolumeGrid) -> Self {
        Self::from_grid(grid, |v| v != 0.0)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn spacing(&self) -> (f64, f64, f64) {
        self.spacing
    }

    pub fn values(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims.0 * (y + self.dims.1 * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.mask[self.index(x, y, z)]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|b| **b).count()
    }

    pub fn is_region_empty(&self) -> bool {
        !self.mask.iter().any(|b| *b)
    }

    /// Iterator over foreground voxel indices `(x, y, z)`.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let (nx, ny, _) = self.dims;
        self.mask.iter().enumerate().filter(|(_, b)| **b).map(move |(i, _)| {
            let x = i % nx;
            let y = (i / nx) % ny;
            let z = i / (nx * ny);
            (x, y, z)
        })
    }
}

/// A binary mask tagged with the region it was extracted from.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    pub region: Region,
    pub mask: BinaryMask,
}

/// Extracts one region mask from a label map.
pub fn region_mask(seg: &SegLabelMap, region: Region) -> RegionMask {
    RegionMask {
        region,
        mask: BinaryMask::from_grid(seg.grid(), |v| region.contains_label(v)),
    }
}

/// All six region masks of a label map.
#[derive(Debug, Clone)]
pub struct SegRegions {
    pub et: RegionMask,
    pub wt: RegionMask,
    pub tc: RegionMask,
    pub necrosis: RegionMask,
    pub edema: RegionMask,
    pub enhancing: RegionMask,
}

pub fn region_masks(seg: &SegLabelMap) -> SegRegions {
    SegRegions {
        et: region_mask(seg, Region::Et),
        wt: region_mask(seg, Region::Wt),
        tc: region_mask(seg, Region::Tc),
        necrosis: region_mask(seg, Region::Necrosis),
        edema: region_mask(seg, Region::Edema),
        enhancing: region_mask(seg, Region::Enhancing),
    }
}

fn check_dims(a: &BinaryMask, b: &BinaryMask) -> Result<(), MetricError> {
    if a.dims != b.dims {
        return Err(MetricError::DimensionMismatch(a.dims, b.dims));
    }
    Ok(())
}

/// Dice overlap 2|A∩B| / (|A|+|B|). Two empty masks agree perfectly (1.0);
/// one empty mask scores 0.0.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let mut inter = 0usize;
    let mut total = 0usize;
    for (&pa, &pb) in a.mask.iter().zip(&b.mask) {
        inter += (pa && pb) as usize;
        total += pa as usize + pb as usize;
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / total as f64)
}

/// Per-class dice weights over the three tumor classes. Construction
/// normalizes the triple to sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiceWeights {
    pub necrosis: f64,
    pub edema: f64,
    pub enhancing: f64,
}

impl DiceWeights {
    pub fn new(necrosis: f64, edema: f64, enhancing: f64) -> Result<Self, MetricError> {
        for w in [necrosis, edema, enhancing] {
            if !(w >= 0.0) {
                return Err(MetricError::InvalidWeights(format!(
                    "weight {w} must be non-negative"
                )));
            }
        }
        let sum = necrosis + edema + enhancing;
        if sum <= 0.0 {
            return Err(MetricError::InvalidWeights("weights sum to zero".into()));
        }
        Ok(Self {
            necrosis: necrosis / sum,
            edema: edema / sum,
            enhancing: enhancing / sum,
        })
    }
}

impl Default for DiceWeights {
    fn default() -> Self {
        let (n, e, h) = DEFAULT_DICE_WEIGHTS;
        Self::new(n, e, h).expect("default weights are valid")
    }
}

/// Per-class probability volumes in class order
/// (background, necrosis, edema, enhancing).
#[derive(Debug, Clone)]
pub struct ProbMaps {
    dims: (usize, usize, usize),
    classes: [Vec<f64>; 4],
}

impl ProbMaps {
    pub fn new(
        dims: (usize, usize, usize),
        classes: [Vec<f64>; 4],
    ) -> Result<Self, MetricError> {
        let n = dims.0 * dims.1 * dims.2;
        for (c, map) in classes.iter().enumerate() {
            if map.len() != n {
                return Err(MetricError::InvalidProbMaps(format!(
                    "class {c} has {} values, expected {n}",
                    map.len()
                )));
            }
        }
        for i in 0..n {
            let mut sum = 0.0;
            for map in &classes {
                let p = map[i];
                if !(0.0..=1.0).contains(&p) {
                    return Err(MetricError::InvalidProbMaps(format!(
                        "probability {p} at voxel {i} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-5 {
                return Err(MetricError::InvalidProbMaps(format!(
                    "probabilities at voxel {i} sum to {sum}"
                )));
            }
        }
        Ok(Self { dims, classes })
    }

    /// One-hot maps from a label map (a perfect prediction).
    pub fn one_hot(seg: &SegLabelMap) -> Self {
        let grid = seg.grid();
        let mut classes: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; grid.len()]);
        for (i, &v) in grid.data().iter().enumerate() {
            let c = match v {
                1.0 => 1,
                2.0 => 2,
                4.0 => 3,
                _ => 0,
            };
            classes[c][i] = 1.0;
        }
        Self {
            dims: grid.dims(),
            classes,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn class(&self, c: usize) -> &[f64] {
        &self.classes[c]
    }

    /// Clones the maps with one voxel's probability row replaced.
    pub fn with_voxel(&self, i: usize, probs: [f64; 4]) -> Result<Self, MetricError> {
        let mut classes = self.classes.clone();
        for (c, map) in classes.iter_mut().enumerate() {
            map[i] = probs[c];
        }
        Self::new(self.dims, classes)
    }
}

/// Weighted soft dice loss over the three tumor classes:
/// `1 - Σ_c w_c · (2·Σ p·g + ε) / (Σ p + Σ g + ε)`.
pub fn weighted_dice_loss(
    pred: &ProbMaps,
    gt: &SegLabelMap,
    weights: &DiceWeights,
) -> Result<f64, MetricError> {
    let grid = gt.grid();
    if pred.dims != grid.dims() {
        return Err(MetricError::DimensionMismatch(pred.dims, grid.dims()));
    }
    let mut loss = 1.0;
    for (class, label, w) in [
        (1usize, 1.0, weights.necrosis),
        (2, 2.0, weights.edema),
        (3, 4.0, weights.enhancing),
    ] {
        let p = pred.class(class);
        let mut inter = 0.0;
        let mut psum = 0.0;
        let mut gsum = 0.0;
        for (i, &v) in grid.data().iter().enumerate() {
            let g = (v == label) as u8 as f64;
            inter += p[i] * g;
            psum += p[i];
            gsum += g;
        }
        let soft = (2.0 * inter + SOFT_DICE_EPS) / (psum + gsum + SOFT_DICE_EPS);
        loss -= w * soft;
    }
    Ok(loss)
}

/// Exact squared Euclidean distance transform (lower envelope of parabolas),
/// run separably per axis with the axis spacing folded into the weight.
fn dt1d(f: &[f64], w: f64, out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let fq = f[q] + w * (q * q) as f64;
        // pop parabolas the new one dominates; z[0] = -inf bounds the loop
        let s = loop {
            let p = v[k];
            let s = (fq - (f[p] + w * (p * p) as f64)) / (2.0 * w * (q - p) as f64);
            if s <= z[k] {
                k -= 1;
            } else {
                break s;
            }
        };
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = w * d * d + f[v[k]];
    }
}

// Finite stand-in for "no foreground on this line"; real squared distances
// in supported volumes stay far below it.
const DT_INF: f64 = 1e30;

/// Squared distance (mm^2) from every voxel to the nearest foreground voxel.
fn squared_edt(mask: &BinaryMask) -> Vec<f64> {
    let (nx, ny, nz) = mask.dims;
    let (sx, sy, sz) = mask.spacing;
    let mut d: Vec<f64> = mask
        .mask
        .iter()
        .map(|&m| if m { 0.0 } else { DT_INF })
        .collect();

    let maxn = nx.max(ny).max(nz);
    let mut line = vec![0.0; maxn];
    let mut out = vec![0.0; maxn];
    let mut v = vec![0usize; maxn];
    let mut z = vec![0.0; maxn + 1];

    // x pass
    for zz in 0..nz {
        for yy in 0..ny {
            let base = (zz * ny + yy) * nx;
            line[..nx].copy_from_slice(&d[base..base + nx]);
            dt1d(&line[..nx], sx * sx, &mut out[..nx], &mut v, &mut z);
            d[base..base + nx].copy_from_slice(&out[..nx]);
        }
    }
    // y pass
    for zz in 0..nz {
        for xx in 0..nx {
            for yy in 0..ny {
                line[yy] = d[(zz * ny + yy) * nx + xx];
            }
            dt1d(&line[..ny], sy * sy, &mut out[..ny], &mut v, &mut z);
            for yy in 0..ny {
                d[(zz * ny + yy) * nx + xx] = out[yy];
            }
        }
    }
    // z pass
    for yy in 0..ny {
        for xx in 0..nx {
            for zz in 0..nz {
                line[zz] = d[(zz * ny + yy) * nx + xx];
            }
            dt1d(&line[..nz], sz * sz, &mut out[..nz], &mut v, &mut z);
            for zz in 0..nz {
                d[(zz * ny + yy) * nx + xx] = out[zz];
            }
        }
    }
    d
}

fn directed_distances(from: &BinaryMask, to_edt: &[f64]) -> Vec<f64> {
    from.mask
        .iter()
        .enumerate()
        .filter(|(_, m)| **m)
        .map(|(i, _)| to_edt[i].max(0.0).sqrt())
        .collect()
}

/// Linear-interpolation percentile of unsorted samples, percentile in (0, 100].
fn percentile(samples: &mut [f64], pct: f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if pct >= 100.0 {
        return *samples.last().unwrap();
    }
    let rank = pct / 100.0 * (samples.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        samples[lo]
    } else {
        let t = rank - lo as f64;
        samples[lo] * (1.0 - t) + samples[hi] * t
    }
}

/// Classic (100th percentile) symmetric Hausdorff distance in mm between
/// voxel centers. Errors if either mask is empty.
pub fn hausdorff(a: &BinaryMask, b: &BinaryMask) -> Result<f64, MetricError> {
    hausdorff_percentile(a, b, 100.0)
}

/// Percentile Hausdorff: the directed distances are reduced to the given
/// percentile per direction (HD95 uses 95.0) and the worse direction wins.
pub fn hausdorff_percentile(
    a: &BinaryMask,
    b: &BinaryMask,
    pct: f64,
) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    if a.spacing != b.spacing {
        return Err(MetricError::SpacingMismatch(a.spacing, b.spacing));
    }
    if !(0.0..=100.0).contains(&pct) || pct == 0.0 {
        return Err(MetricError::BadPercentile(pct));
    }
    if a.is_region_empty() || b.is_region_empty() {
        return Err(MetricError::EmptyMask);
    }
    let edt_a = squared_edt(a);
    let edt_b = squared_edt(b);
    let mut ab = directed_distances(a, &edt_b);
    let mut ba = directed_distances(b, &edt_a);
    Ok(percentile(&mut ab, pct).max(percentile(&mut ba, pct)))
}
