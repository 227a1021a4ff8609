//! Volume ingestion and the core grid types shared by every other module.
//!
//! Grids live in voxel space: `dims = (nx, ny, nz)` with the data stored
//! x-fastest, and `spacing` giving the physical voxel size in mm.

mod nifti;

pub use nifti::{read_nifti, write_nifti, write_nifti_as, DataType, NiftiMeta};

use thiserror::Error;

/// BraTS label alphabet: background, necrosis / non-enhancing tumor, edema,
/// enhancing tumor. Label 4 is kept as-is, never remapped to 3.
pub const LABEL_VALUES: [f64; 4] = [0.0, 1.0, 2.0, 4.0];

/// Highest parcel id in the supported atlas label volumes (0 = outside).
pub const MAX_ATLAS_LABEL: f64 = 56.0;

#[derive(Debug, Error)]
pub enum VolioError {
    #[error("data length {got} does not match dims {dims:?} ({expected} voxels)")]
    DataLength {
        dims: (usize, usize, usize),
        expected: usize,
        got: usize,
    },
    #[error("all spacing components must be strictly positive, got {0:?}")]
    NonPositiveSpacing((f64, f64, f64)),
    #[error("dims must all be positive, got {0:?}")]
    EmptyDims((usize, usize, usize)),
    #[error("value {0} is not a valid segmentation label (expected 0, 1, 2 or 4)")]
    InvalidLabel(f64),
    #[error("value {0} is not a valid atlas parcel id (expected integer in 0..=56)")]
    InvalidAtlasLabel(f64),
    #[error("pad target {target:?} is smaller than current dims {dims:?}")]
    PadTooSmall {
        dims: (usize, usize, usize),
        target: (usize, usize, usize),
    },
    #[error("subject id must be non-empty")]
    EmptyId,
    #[error("age must be > 0, got {0}")]
    InvalidAge(f64),
    #[error("survival_days must be >= 0, got {0}")]
    InvalidSurvival(f64),
    #[error("not a NIfTI-1 file: {0}")]
    Format(String),
    #[error("unsupported NIfTI feature: {0}")]
    Unsupported(String),
    #[error("value {value} cannot be stored as {datatype:?} without loss")]
    NotRepresentable { value: f64, datatype: DataType },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What the scalar values of a grid mean. Label and atlas grids carry
/// integer-coded values and are validated against their alphabets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Intensity,
    Label,
    Atlas,
}

/// A 3D scalar grid with voxel spacing.
///
/// Immutable after construction: the data buffer is never exposed mutably,
/// so grids can be shared read-only across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    value_kind: ValueKind,
    data: Vec<f64>,
}

impl VolumeGrid {
    pub fn new(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        value_kind: ValueKind,
        data: Vec<f64>,
    ) -> Result<Self, VolioError> {
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
            return Err(VolioError::EmptyDims(dims));
        }
        let expected = dims.0 * dims.1 * dims.2;
        if data.len() != expected {
            return Err(VolioError::DataLength {
                dims,
                expected,
                got: data.len(),
            });
        }
        if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.2 > 0.0) {
            return Err(VolioError::NonPositiveSpacing(spacing));
        }
        match value_kind {
            ValueKind::Intensity => {}
            ValueKind::Label => {
                if let Some(&bad) = data
                    .iter()
                    .find(|v| !(**v == 0.0 || **v == 1.0 || **v == 2.0 || **v == 4.0))
                {
                    return Err(VolioError::InvalidLabel(bad));
                }
            }
            ValueKind::Atlas => {
                if let Some(&bad) = data
                    .iter()
                    .find(|v| v.fract() != 0.0 || **v < 0.0 || **v > MAX_ATLAS_LABEL)
                {
                    return Err(VolioError::InvalidAtlasLabel(bad));
                }
            }
        }
        Ok(Self {
            dims,
            spacing,
            value_kind,
            data,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn spacing(&self) -> (f64, f64, f64) {
        self.spacing
    }

    pub fn value_kind(&self) -> ValueKind {
        self.value_kind
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flat index of voxel `(x, y, z)`; data is x-fastest.
    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims.0 * (y + self.dims.1 * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.index(x, y, z)]
    }

    /// Volume of one voxel in mm^3.
    pub fn voxel_volume(&self) -> f64 {
        self.spacing.0 * self.spacing.1 * self.spacing.2
    }

    /// Reinterpret the value kind, re-running the target kind's validation.
    pub fn with_value_kind(self, kind: ValueKind) -> Result<Self, VolioError> {
        Self::new(self.dims, self.spacing, kind, self.data)
    }
}

/// Integer label volume over the alphabet {0, 1, 2, 4}.
#[derive(Debug, Clone, PartialEq)]
pub struct SegLabelMap {
    grid: VolumeGrid,
}

impl SegLabelMap {
    /// Wraps a grid as a label map. Any value outside {0, 1, 2, 4} is
    /// rejected regardless of the grid's original value kind. Grids already
    /// carrying `ValueKind::Label` were validated at construction and wrap
    /// without a second scan.
    pub fn new(grid: VolumeGrid) -> Result<Self, VolioError> {
        if grid.value_kind() == ValueKind::Label {
            return Ok(Self { grid });
        }
        let grid = grid.with_value_kind(ValueKind::Label)?;
        Ok(Self { grid })
    }

    pub fn grid(&self) -> &VolumeGrid {
        &self.grid
    }

    pub fn into_grid(self) -> VolumeGrid {
        self.grid
    }
}

/// Surgical resection status of a subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resection {
    Gtr,
    Str,
    Na,
}

impl Resection {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "GTR" => Some(Self::Gtr),
            "STR" => Some(Self::Str),
            "NA" | "" => Some(Self::Na),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Gtr => "GTR",
            Self::Str => "STR",
            Self::Na => "NA",
        }
    }
}

/// Per-subject clinical metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub id: String,
    pub age: Option<f64>,
    pub resection: Resection,
    pub survival_days: Option<f64>,
}

impl SubjectRecord {
    pub fn new(
        id: impl Into<String>,
        age: Option<f64>,
        resection: Resection,
        survival_days: Option<f64>,
    ) -> Result<Self, VolioError> {
        let id = id.into();
        if id.is_empty() {
            return Err(VolioError::EmptyId);
        }
        if let Some(a) = age {
            if !(a > 0.0) {
                return Err(VolioError::InvalidAge(a));
            }
        }
        if let Some(s) = survival_days {
            if !(s >= 0.0) {
                return Err(VolioError::InvalidSurvival(s));
            }
        }
        Ok(Self {
            id,
            age,
            resection,
            survival_days,
        })
    }
}

/// Pads a grid up to `target` dims. The original data stays in the low-index
/// corner and every appended voxel is exactly zero; spacing is unchanged.
pub fn zero_pad(
    grid: &VolumeGrid,
    target: (usize, usize, usize),
) -> Result<VolumeGrid, VolioError> {
    let dims = grid.dims();
    if target.0 < dims.0 || target.1 < dims.1 || target.2 < dims.2 {
        return Err(VolioError::PadTooSmall { dims, target });
    }
    if target == dims {
        return Ok(grid.clone());
    }
    let mut out = vec![0.0; target.0 * target.1 * target.2];
    for z in 0..dims.2 {
        for y in 0..dims.1 {
            let src = grid.index(0, y, z);
            let dst = (z * target.1 + y) * target.0;
            out[dst..dst + dims.0].copy_from_slice(&grid.data()[src..src + dims.0]);
        }
    }
    VolumeGrid::new(target, grid.spacing(), grid.value_kind(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label_grid(dims: (usize, usize, usize), data: Vec<f64>) -> VolumeGrid {
        VolumeGrid::new(dims, (1.0, 1.0, 1.0), ValueKind::Label, data).unwrap()
    }

    #[test]
    fn grid_rejects_length_mismatch() {
        let err = VolumeGrid::new((2, 2, 2), (1.0, 1.0, 1.0), ValueKind::Intensity, vec![0.0; 7]);
        assert!(matches!(err, Err(VolioError::DataLength { .. })));
    }

    #[test]
    fn grid_rejects_non_positive_spacing() {
        for spacing in [(0.0, 1.0, 1.0), (1.0, -2.0, 1.0), (1.0, 1.0, f64::NAN)] {
            let err = VolumeGrid::new((1, 1, 1), spacing, ValueKind::Intensity, vec![0.0]);
            assert!(matches!(err, Err(VolioError::NonPositiveSpacing(_))));
        }
    }

    #[test]
    fn label_alphabet_is_enforced() {
        let err = VolumeGrid::new(
            (2, 1, 1),
            (1.0, 1.0, 1.0),
            ValueKind::Label,
            vec![1.0, 3.0],
        );
        assert!(matches!(err, Err(VolioError::InvalidLabel(v)) if v == 3.0));
        assert!(label_grid((2, 2, 1), vec![0.0, 1.0, 2.0, 4.0]).data().len() == 4);
    }

    #[test]
    fn seg_label_map_rejects_intensity_grid_with_bad_values() {
        let g = VolumeGrid::new(
            (2, 1, 1),
            (1.0, 1.0, 1.0),
            ValueKind::Intensity,
            vec![1.0, 2.5],
        )
        .unwrap();
        assert!(matches!(
            SegLabelMap::new(g),
            Err(VolioError::InvalidLabel(v)) if v == 2.5
        ));
    }

    #[test]
    fn atlas_alphabet_is_enforced() {
        let err = VolumeGrid::new(
            (2, 1, 1),
            (1.0, 1.0, 1.0),
            ValueKind::Atlas,
            vec![56.0, 57.0],
        );
        assert!(matches!(err, Err(VolioError::InvalidAtlasLabel(v)) if v == 57.0));
    }

    #[test]
    fn subject_record_validation() {
        assert!(matches!(
            SubjectRecord::new("", None, Resection::Na, None),
            Err(VolioError::EmptyId)
        ));
        assert!(matches!(
            SubjectRecord::new("s", Some(-1.0), Resection::Na, None),
            Err(VolioError::InvalidAge(_))
        ));
        assert!(matches!(
            SubjectRecord::new("s", None, Resection::Na, Some(-3.0)),
            Err(VolioError::InvalidSurvival(_))
        ));
        assert!(SubjectRecord::new("s", Some(60.0), Resection::Gtr, Some(0.0)).is_ok());
    }

    #[test]
    fn zero_pad_appends_zero_slices() {
        // 2x2x2 with a recognizable pattern
        let g = label_grid((2, 2, 2), vec![1.0, 2.0, 4.0, 0.0, 1.0, 1.0, 2.0, 4.0]);
        let p = zero_pad(&g, (3, 2, 4)).unwrap();
        assert_eq!(p.dims(), (3, 2, 4));
        assert_eq!(p.spacing(), g.spacing());
        // original corner preserved
        for z in 0..2 {
            for y in 0..2 {
                for x in 0..2 {
                    assert_eq!(p.get(x, y, z), g.get(x, y, z));
                }
            }
        }
        // everything else zero
        let nonzero_in: usize = g.data().iter().filter(|v| **v != 0.0).count();
        let nonzero_out: usize = p.data().iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero_in, nonzero_out);
    }

    #[test]
    fn zero_pad_identity_when_target_equals_dims() {
        let g = label_grid((2, 2, 2), vec![0.0; 8]);
        let p = zero_pad(&g, (2, 2, 2)).unwrap();
        assert_eq!(p, g);
    }

    #[test]
    fn zero_pad_rejects_shrinking() {
        let g = label_grid((2, 2, 2), vec![0.0; 8]);
        assert!(matches!(
            zero_pad(&g, (1, 1, 1)),
            Err(VolioError::PadTooSmall { .. })
        ));
    }
}
