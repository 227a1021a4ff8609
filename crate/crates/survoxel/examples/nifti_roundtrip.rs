//! Write a small volume as NIfTI-1 (plain and gzipped), read it back, and
//! show that dims, spacing and values survive unchanged.
//!
//! ```bash
//! cargo run -p survoxel --example nifti_roundtrip
//! ```

use survoxel::volio::{read_nifti, write_nifti_as, DataType, ValueKind, VolumeGrid, zero_pad};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    let grid = VolumeGrid::new(
        (4, 3, 2),
        (1.0, 1.0, 2.5),
        ValueKind::Intensity,
        (0..24).map(|i| i as f64 * 0.5 - 3.0).collect(),
    )?;

    for (datatype, name) in [
        (DataType::F32, "f32.nii"),
        (DataType::F64, "f64.nii.gz"),
        (DataType::I16, "i16.nii"),
    ] {
        let path = dir.path().join(name);
        // integer datatypes need integer values
        let g = if datatype == DataType::I16 {
            VolumeGrid::new(
                grid.dims(),
                grid.spacing(),
                ValueKind::Intensity,
                grid.data().iter().map(|v| v.round()).collect(),
            )?
        } else {
            grid.clone()
        };
        write_nifti_as(&g, &path, datatype)?;
        let (back, meta) = read_nifti(&path)?;
        assert_eq!(back.dims(), g.dims());
        assert_eq!(back.spacing(), g.spacing());
        assert_eq!(back.data(), g.data());
        println!(
            "{name:<12} datatype {:>3?}  dims {:?}  values intact: {}",
            meta.datatype,
            back.dims(),
            back.data() == g.data()
        );
    }

    // padding for inference shapes: new voxels are exactly zero
    let padded = zero_pad(&grid, (4, 3, 4))?;
    let zeros = padded.data().iter().filter(|v| **v == 0.0).count()
        - grid.data().iter().filter(|v| **v == 0.0).count();
    println!("zero_pad (4,3,2) -> (4,3,4): {zeros} new zero voxels");
    Ok(())
}
