//! Coordinate channels and the 3D convolution forward pass.

use super::NeuralError;

/// A channel-major 3D feature map: data index is
/// `((c * D + d) * H + h) * W + w`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap3D {
    channels: usize,
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl FeatureMap3D {
    pub fn new(
        channels: usize,
        dims: (usize, usize, usize),
        data: Vec<f64>,
    ) -> Result<Self, NeuralError> {
        let expected = channels * dims.0 * dims.1 * dims.2;
        if data.len() != expected {
            return Err(NeuralError::ShapeMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            channels,
            dims,
            data,
        })
    }

    pub fn zeros(channels: usize, dims: (usize, usize, usize)) -> Self {
        Self {
            channels,
            dims,
            data: vec![0.0; channels * dims.0 * dims.1 * dims.2],
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn index(&self, c: usize, d: usize, h: usize, w: usize) -> usize {
        ((c * self.dims.0 + d) * self.dims.1 + h) * self.dims.2 + w
    }

    #[inline]
    pub fn get(&self, c: usize, d: usize, h: usize, w: usize) -> f64 {
        self.data[self.index(c, d, h, w)]
    }

    /// One channel as a contiguous slice.
    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.dims.0 * self.dims.1 * self.dims.2;
        &self.data[c * n..(c + 1) * n]
    }

    /// Appends the channels of `other` (same dims) after this map's own.
    pub fn concat_channels(&self, other: &FeatureMap3D) -> Result<FeatureMap3D, NeuralError> {
        if self.dims != other.dims {
            return Err(NeuralError::ShapeMismatch {
                expected: self.dims.0 * self.dims.1 * self.dims.2,
                got: other.dims.0 * other.dims.1 * other.dims.2,
            });
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(FeatureMap3D {
            channels: self.channels + other.channels,
            dims: self.dims,
            data,
        })
    }
}

/// Three coordinate channels over `dims = (D, H, W)`. Channel `k` holds the
/// voxel's index along axis `k` divided by the maximum index on that axis,
/// so the channel maximum is exactly 1; an axis of extent 1 yields zeros.
pub fn coord_channels(dims: (usize, usize, usize)) -> FeatureMap3D {
    let (dd, hh, ww) = dims;
    let norm = |i: usize, extent: usize| -> f64 {
        if extent <= 1 {
            0.0
        } else {
            i as f64 / (extent - 1) as f64
        }
    };
    let mut map = FeatureMap3D::zeros(3, dims);
    for d in 0..dd {
        for h in 0..hh {
            for w in 0..ww {
                let i = map.index(0, d, h, w);
                map.data[i] = norm(d, dd);
                let i = map.index(1, d, h, w);
                map.data[i] = norm(h, hh);
                let i = map.index(2, d, h, w);
                map.data[i] = norm(w, ww);
            }
        }
    }
    map
}

/// Convolution weights: `[out][in][kd][kh][kw]` flattened, one bias per
/// output channel. Kernel extents must be odd (same-padding convention).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel3D {
    out_channels: usize,
    in_channels: usize,
    kdims: (usize, usize, usize),
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl ConvKernel3D {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        kdims: (usize, usize, usize),
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self, NeuralError> {
        if kdims.0 % 2 == 0 || kdims.1 % 2 == 0 || kdims.2 % 2 == 0 {
            return Err(NeuralError::EvenKernel(kdims));
        }
        let expected = out_channels * in_channels * kdims.0 * kdims.1 * kdims.2;
        if weights.len() != expected {
            return Err(NeuralError::ShapeMismatch {
                expected,
                got: weights.len(),
            });
        }
        if bias.len() != out_channels {
            return Err(NeuralError::ShapeMismatch {
                expected: out_channels,
                got: bias.len(),
            });
        }
        if weights.iter().chain(bias.iter()).any(|w| !w.is_finite()) {
            return Err(NeuralError::NonFinite("kernel weights"));
        }
        Ok(Self {
            out_channels,
            in_channels,
            kdims,
            weights,
            bias,
        })
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn kdims(&self) -> (usize, usize, usize) {
        self.kdims
    }

    #[inline]
    fn weight(&self, o: usize, i: usize, kd: usize, kh: usize, kw: usize) -> f64 {
        let (d, h, w) = self.kdims;
        self.weights[(((o * self.in_channels + i) * d + kd) * h + kh) * w + kw]
    }
}

/// Plain 3D cross-correlation, stride 1, zero same-padding: output dims
/// equal input dims and output channels equal the kernel's out-channels.
pub fn conv3d(input: &FeatureMap3D, kernel: &ConvKernel3D) -> Result<FeatureMap3D, NeuralError> {
    if kernel.in_channels != input.channels() {
        return Err(NeuralError::ChannelMismatch {
            expected: kernel.in_channels,
            got: input.channels(),
        });
    }
    let (dd, hh, ww) = input.dims();
    let (kd, kh, kw) = kernel.kdims;
    let (rd, rh, rw) = (kd as isize / 2, kh as isize / 2, kw as isize / 2);
    let mut out = FeatureMap3D::zeros(kernel.out_channels, input.dims());
    for o in 0..kernel.out_channels {
        for d in 0..dd as isize {
            for h in 0..hh as isize {
                for w in 0..ww as isize {
                    let mut acc = 0.0;
                    for c in 0..kernel.in_channels {
                        for dk in 0..kd as isize {
                            let dz = d + dk - rd;
                            if dz < 0 || dz >= dd as isize {
                                continue;
                            }
                            for hk in 0..kh as isize {
                                let hy = h + hk - rh;
                                if hy < 0 || hy >= hh as isize {
                                    continue;
                                }
                                for wk in 0..kw as isize {
                                    let wx = w + wk - rw;
                                    if wx < 0 || wx >= ww as isize {
                                        continue;
                                    }
                                    acc += kernel.weight(
                                        o,
                                        c,
                                        dk as usize,
                                        hk as usize,
                                        wk as usize,
                                    ) * input.get(
                                        c,
                                        dz as usize,
                                        hy as usize,
                                        wx as usize,
                                    );
                                }
                            }
                        }
                    }
                    let i = out.index(o, d as usize, h as usize, w as usize);
                    out.data[i] = acc + kernel.bias[o];
                }
            }
        }
    }
    Ok(out)
}

/// Position-encoding convolution: the three normalized coordinate channels
/// are appended to the input (so the kernel must expect `channels + 3`) and
/// the concatenated map goes through [`conv3d`].
pub fn pecl_forward(
    input: &FeatureMap3D,
    kernel: &ConvKernel3D,
) -> Result<FeatureMap3D, NeuralError> {
    if kernel.in_channels != input.channels() + 3 {
        return Err(NeuralError::ChannelMismatch {
            expected: kernel.in_channels,
            got: input.channels() + 3,
        });
    }
    let augmented = input.concat_channels(&coord_channels(input.dims()))?;
    conv3d(&augmented, kernel)
}
