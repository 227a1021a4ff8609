//! The position-encoding convolutional layer: normalized coordinate
//! channels are appended to the input before the 3D convolution, so the
//! layer can tell *where* a feature sits.
//!
//! ```bash
//! cargo run -p survoxel --example pecl_layer
//! ```

use survoxel::neural::{conv3d, coord_channels, pecl_forward, ConvKernel3D, FeatureMap3D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dims = (4, 4, 4);
    let coords = coord_channels(dims);
    println!("coordinate channel for the depth axis, first column:");
    for d in 0..dims.0 {
        println!("  d={d}: {:.3}", coords.get(0, d, 0, 0));
    }

    // two identical bright voxels at different depths
    let mut data = vec![0.0; 64];
    data[(1 * 4 + 1) * 4 + 1] = 1.0; // (d=1, h=1, w=1)
    data[(3 * 4 + 1) * 4 + 1] = 1.0; // (d=3, h=1, w=1)
    let input = FeatureMap3D::new(1, dims, data)?;

    // a plain convolution cannot distinguish the two voxels...
    let mut plain_w = vec![0.0; 27];
    plain_w[13] = 1.0; // identity 3x3x3 kernel
    let plain = ConvKernel3D::new(1, 1, (3, 3, 3), plain_w.clone(), vec![0.0])?;
    let out_plain = conv3d(&input, &plain)?;
    println!(
        "plain conv responses:  d=1 -> {:.3},  d=3 -> {:.3}",
        out_plain.get(0, 1, 1, 1),
        out_plain.get(0, 3, 1, 1)
    );

    // ...but a PECL kernel that also reads the depth channel can
    let mut pecl_w = vec![0.0; 4 * 27];
    pecl_w[13] = 1.0; // input channel, center tap
    pecl_w[27 + 13] = 1.0; // depth-coordinate channel, center tap
    let pecl = ConvKernel3D::new(1, 4, (3, 3, 3), pecl_w, vec![0.0])?;
    let out_pecl = pecl_forward(&input, &pecl)?;
    println!(
        "PECL responses:        d=1 -> {:.3},  d=3 -> {:.3}",
        out_pecl.get(0, 1, 1, 1),
        out_pecl.get(0, 3, 1, 1)
    );

    // with zero coordinate weights PECL reduces to the plain layer exactly
    let mut reduced_w = plain_w;
    reduced_w.extend(std::iter::repeat(0.0).take(3 * 27));
    let reduced = ConvKernel3D::new(1, 4, (3, 3, 3), reduced_w, vec![0.0])?;
    let out_reduced = pecl_forward(&input, &reduced)?;
    println!(
        "zero coordinate weights reduce to plain conv exactly: {}",
        out_reduced.data() == out_plain.data()
    );
    Ok(())
}
