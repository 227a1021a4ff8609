//! Compute the 36 handcrafted features (volumes, ratios, surface areas,
//! epicenters, atlas parcels, relative location, clinical slots) for one
//! synthetic subject and print them by name.
//!
//! ```bash
//! cargo run -p survoxel --example handcrafted_features
//! ```

use survoxel::radiomics::{assemble_handcrafted, AtlasLabelMap, FEATURE_NAMES};
use survoxel::segmetrics::BinaryMask;
use survoxel::volio::{Resection, SegLabelMap, SubjectRecord, ValueKind, VolumeGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dims = (32, 32, 32);
    let n = dims.0 * dims.1 * dims.2;

    // tumor: necrotic core wrapped in enhancing rim wrapped in edema
    let mut labels = vec![0.0; n];
    let idx = |x: usize, y: usize, z: usize| x + dims.0 * (y + dims.1 * z);
    for z in 8..24 {
        for y in 8..24 {
            for x in 8..24 {
                labels[idx(x, y, z)] = 2.0;
            }
        }
    }
    for z in 11..21 {
        for y in 11..21 {
            for x in 11..21 {
                labels[idx(x, y, z)] = 4.0;
            }
        }
    }
    for z in 13..19 {
        for y in 13..19 {
            for x in 13..19 {
                labels[idx(x, y, z)] = 1.0;
            }
        }
    }
    let seg = SegLabelMap::new(VolumeGrid::new(
        dims,
        (1.0, 1.0, 1.0),
        ValueKind::Label,
        labels,
    )?)?;

    // the whole synthetic volume counts as brain
    let brain = BinaryMask::new(dims, (1.0, 1.0, 1.0), vec![true; n])?;

    // a toy parcellation: left half parcel 12, right half parcel 34
    let atlas_data: Vec<f64> = (0..n)
        .map(|i| if i % dims.0 < dims.0 / 2 { 12.0 } else { 34.0 })
        .collect();
    let atlas = AtlasLabelMap::new(VolumeGrid::new(
        dims,
        (1.0, 1.0, 1.0),
        ValueKind::Atlas,
        atlas_data,
    )?)?;

    let subject = SubjectRecord::new("example-subject", Some(61.3), Resection::Gtr, None)?;
    let (features, provenance) = assemble_handcrafted(&subject, &seg, &brain, &atlas, 60.0)?;

    println!("{} features for {}:", FEATURE_NAMES.len(), subject.id);
    for (name, value) in FEATURE_NAMES.iter().zip(features.values()) {
        println!("  {name:<18} {value:>12.4}");
    }
    println!(
        "provenance: age_imputed={} enhancing_fallback={}",
        provenance.age_imputed, provenance.enhancing_fallback
    );
    Ok(())
}
