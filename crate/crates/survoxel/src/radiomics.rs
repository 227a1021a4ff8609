//! Handcrafted per-subject features: region volumes and ratios, exposed
//! surface areas, epicenters with atlas parcel lookups, relative tumor
//! location, age and resection status — 36 slots in a frozen order.

use thiserror::Error;

use crate::segmetrics::{region_masks, BinaryMask};
use crate::volio::{Resection, SegLabelMap, SubjectRecord, ValueKind, VolioError, VolumeGrid};

/// Frozen feature manifest. Model files and feature CSVs reference columns
/// by these names, so the order must never change.
pub const FEATURE_NAMES: [&str; 36] = [
    "age",
    "resection_gtr",
    "resection_str",
    "V_whole",
    "V_necrosis",
    "V_edema",
    "V_enhancing",
    "R_whole_brain",
    "R_necrosis_brain",
    "R_edema_brain",
    "R_enhancing_brain",
    "R_necrosis_enh",
    "R_edema_enh",
    "R_necrosis_edema",
    "S_whole",
    "S_necrosis",
    "S_edema",
    "S_enhancing",
    "SV_whole",
    "SV_necrosis",
    "SV_edema",
    "SV_enhancing",
    "epi_whole_x",
    "epi_whole_y",
    "epi_whole_z",
    "epi_whole_parcel",
    "epi_enh_x",
    "epi_enh_y",
    "epi_enh_z",
    "epi_enh_parcel",
    "rel_whole_x",
    "rel_whole_y",
    "rel_whole_z",
    "rel_enh_x",
    "rel_enh_y",
    "rel_enh_z",
];

pub const FEATURE_COUNT: usize = FEATURE_NAMES.len();

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("dims differ: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("epicenter is undefined for an empty mask")]
    EmptyMask,
    #[error("brain mask is empty")]
    EmptyBrain,
    #[error("whole-tumor region is empty; epicenter features are undefined")]
    EmptyTumor,
    #[error("point {0:?} rounds outside the atlas bounds {1:?}")]
    OutOfAtlas((f64, f64, f64), (usize, usize, usize)),
    #[error(transparent)]
    Volio(#[from] VolioError),
}

/// Atlas parcellation label volume (integer parcels 0..=56, 0 = outside).
#[derive(Debug, Clone)]
pub struct AtlasLabelMap {
    grid: VolumeGrid,
}

impl AtlasLabelMap {
    pub fn new(grid: VolumeGrid) -> Result<Self, FeatureError> {
        let grid = grid.with_value_kind(ValueKind::Atlas)?;
        Ok(Self { grid })
    }

    pub fn grid(&self) -> &VolumeGrid {
        &self.grid
    }
}

/// The 36 features of one subject, in manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct HandcraftedFeatures {
    values: [f64; FEATURE_COUNT],
}

impl HandcraftedFeatures {
    pub fn values(&self) -> &[f64; FEATURE_COUNT] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }
}

/// Records the fallbacks taken while assembling a subject's features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeatureProvenance {
    /// Age was missing and replaced with the supplied fallback value.
    pub age_imputed: bool,
    /// Enhancing region was empty; its epicenter slots hold the whole-tumor
    /// epicenter instead.
    pub enhancing_fallback: bool,
}

/// Volumes (mm^3) of the four tumor regions and the seven volume ratios.
/// Ratios with a zero denominator are 0 so feature rows stay rectangular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeFeatures {
    pub v_whole: f64,
    pub v_necrosis: f64,
    pub v_edema: f64,
    pub v_enhancing: f64,
    pub r_whole_brain: f64,
    pub r_necrosis_brain: f64,
    pub r_edema_brain: f64,
    pub r_enhancing_brain: f64,
    pub r_necrosis_enh: f64,
    pub r_edema_enh: f64,
    pub r_necrosis_edema: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn volume_features(
    seg: &SegLabelMap,
    brain: &BinaryMask,
) -> Result<VolumeFeatures, FeatureError> {
    let grid = seg.grid();
    if brain.dims() != grid.dims() {
        return Err(FeatureError::DimensionMismatch(brain.dims(), grid.dims()));
    }
    let voxel = grid.voxel_volume();
    let mut n_necrosis = 0usize;
    let mut n_edema = 0usize;
    let mut n_enhancing = 0usize;
    for &v in grid.data() {
        match v {
            1.0 => n_necrosis += 1,
            2.0 => n_edema += 1,
            4.0 => n_enhancing += 1,
            _ => {}
        }
    }
    let v_necrosis = n_necrosis as f64 * voxel;
    let v_edema = n_edema as f64 * voxel;
    let v_enhancing = n_enhancing as f64 * voxel;
    let v_whole = (n_necrosis + n_edema + n_enhancing) as f64 * voxel;
    let v_brain = brain.count() as f64 * voxel;
    Ok(VolumeFeatures {
        v_whole,
        v_necrosis,
        v_edema,
        v_enhancing,
        r_whole_brain: ratio(v_whole, v_brain),
        r_necrosis_brain: ratio(v_necrosis, v_brain),
        r_edema_brain: ratio(v_edema, v_brain),
        r_enhancing_brain: ratio(v_enhancing, v_brain),
        r_necrosis_enh: ratio(v_necrosis, v_enhancing),
        r_edema_enh: ratio(v_edema, v_enhancing),
        r_necrosis_edema: ratio(v_necrosis, v_edema),
    })
}

/// Exposed-face surface area in mm^2: every foreground face adjacent to
/// background or to the volume boundary counts (6-connectivity).
pub fn surface_area(mask: &BinaryMask) -> f64 {
    let (nx, ny, nz) = mask.dims();
    let (sx, sy, sz) = mask.spacing();
    let face_x = sy * sz;
    let face_y = sx * sz;
    let face_z = sx * sy;
    let mut x_faces = 0usize;
    let mut y_faces = 0usize;
    let mut z_faces = 0usize;
    for (x, y, z) in mask.foreground() {
        if x == 0 || !mask.get(x - 1, y, z) {
            x_faces += 1;
        }
        if x + 1 == nx || !mask.get(x + 1, y, z) {
            x_faces += 1;
        }
        if y == 0 || !mask.get(x, y - 1, z) {
            y_faces += 1;
        }
        if y + 1 == ny || !mask.get(x, y + 1, z) {
            y_faces += 1;
        }
        if z == 0 || !mask.get(x, y, z - 1) {
            z_faces += 1;
        }
        if z + 1 == nz || !mask.get(x, y, z + 1) {
            z_faces += 1;
        }
    }
    x_faces as f64 * face_x + y_faces as f64 * face_y + z_faces as f64 * face_z
}

/// Mean foreground voxel index per axis.
pub fn epicenter(mask: &BinaryMask) -> Result<(f64, f64, f64), FeatureError> {
    let mut n = 0usize;
    let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
    for (x, y, z) in mask.foreground() {
        sx += x as f64;
        sy += y as f64;
        sz += z as f64;
        n += 1;
    }
    if n == 0 {
        return Err(FeatureError::EmptyMask);
    }
    let n = n as f64;
    Ok((sx / n, sy / n, sz / n))
}

/// Atlas parcel at the voxel nearest to a real-valued point
/// (round half away from zero per axis).
pub fn parcellation_of(
    point: (f64, f64, f64),
    atlas: &AtlasLabelMap,
) -> Result<u8, FeatureError> {
    let dims = atlas.grid.dims();
    let (x, y, z) = (point.0.round(), point.1.round(), point.2.round());
    if x < 0.0
        || y < 0.0
        || z < 0.0
        || x >= dims.0 as f64
        || y >= dims.1 as f64
        || z >= dims.2 as f64
    {
        return Err(FeatureError::OutOfAtlas(point, dims));
    }
    Ok(atlas.grid.get(x as usize, y as usize, z as usize) as u8)
}

fn resection_one_hot(r: Resection) -> (f64, f64) {
    match r {
        Resection::Gtr => (1.0, 0.0),
        Resection::Str => (0.0, 1.0),
        Resection::Na => (0.0, 0.0),
    }
}

/// Assembles the 36-slot feature vector for one subject.
///
/// `age_fallback` replaces a missing age (callers typically pass the
/// training-set mean) and the substitution is flagged in the provenance.
pub fn assemble_handcrafted(
    subject: &SubjectRecord,
    seg: &SegLabelMap,
    brain: &BinaryMask,
    atlas: &AtlasLabelMap,
    age_fallback: f64,
) -> Result<(HandcraftedFeatures, FeatureProvenance), FeatureError> {
    let grid = seg.grid();
    if atlas.grid.dims() != grid.dims() {
        return Err(FeatureError::DimensionMismatch(
            atlas.grid.dims(),
            grid.dims(),
        ));
    }
    if brain.is_region_empty() {
        return Err(FeatureError::EmptyBrain);
    }
    let mut prov = FeatureProvenance::default();

    let regions = region_masks(seg);
    let vol = volume_features(seg, brain)?;

    let s_whole = surface_area(&regions.wt.mask);
    let s_necrosis = surface_area(&regions.necrosis.mask);
    let s_edema = surface_area(&regions.edema.mask);
    let s_enhancing = surface_area(&regions.enhancing.mask);

    let epi_whole = match epicenter(&regions.wt.mask) {
        Ok(e) => e,
        Err(FeatureError::EmptyMask) => return Err(FeatureError::EmptyTumor),
        Err(e) => return Err(e),
    };
    let epi_enh = match epicenter(&regions.enhancing.mask) {
        Ok(e) => e,
        Err(FeatureError::EmptyMask) => {
            prov.enhancing_fallback = true;
            epi_whole
        }
        Err(e) => return Err(e),
    };
    let brain_epi = epicenter(brain)?;

    let parcel_whole = parcellation_of(epi_whole, atlas)? as f64;
    let parcel_enh = parcellation_of(epi_enh, atlas)? as f64;

    let age = match subject.age {
        Some(a) => a,
        None => {
            prov.age_imputed = true;
            age_fallback
        }
    };
    let (gtr, str_) = resection_one_hot(subject.resection);

    let values = [
        age,
        gtr,
        str_,
        vol.v_whole,
        vol.v_necrosis,
        vol.v_edema,
        vol.v_enhancing,
        vol.r_whole_brain,
        vol.r_necrosis_brain,
        vol.r_edema_brain,
        vol.r_enhancing_brain,
        vol.r_necrosis_enh,
        vol.r_edema_enh,
        vol.r_necrosis_edema,
        s_whole,
        s_necrosis,
        s_edema,
        s_enhancing,
        ratio(s_whole, vol.v_whole),
        ratio(s_necrosis, vol.v_necrosis),
        ratio(s_edema, vol.v_edema),
        ratio(s_enhancing, vol.v_enhancing),
        epi_whole.0,
        epi_whole.1,
        epi_whole.2,
        parcel_whole,
        epi_enh.0,
        epi_enh.1,
        epi_enh.2,
        parcel_enh,
        epi_whole.0 - brain_epi.0,
        epi_whole.1 - brain_epi.1,
        epi_whole.2 - brain_epi.2,
        epi_enh.0 - brain_epi.0,
        epi_enh.1 - brain_epi.1,
        epi_enh.2 - brain_epi.2,
    ];
    Ok((HandcraftedFeatures { values }, prov))
}
