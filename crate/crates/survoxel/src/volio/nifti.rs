//! Minimal NIfTI-1 reader/writer.
//!
//! Single-file layout only (348-byte header, magic `n+1\0`), little-endian,
//! optionally gzip-compressed. Five datatypes are honored: uint8 (2),
//! int16 (4), int32 (8), float32 (16) and float64 (64). NIfTI-2, DICOM and
//! big-endian files are rejected with a specific error. The qform/sform
//! affine fields are carried through as opaque metadata; all downstream math
//! works in voxel indices.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian, WriteBytesExt};
use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;

use super::{ValueKind, VolioError, VolumeGrid};

const HEADER_LEN: usize = 348;
const VOX_OFFSET: u32 = 352;
const MAGIC: &[u8; 4] = b"n+1\0";
const UNITS_MM: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataType {
    U8,
    I16,
    I32,
    F32,
    F64,
}

impl DataType {
    pub fn code(self) -> i16 {
        match self {
            Self::U8 => 2,
            Self::I16 => 4,
            Self::I32 => 8,
            Self::F32 => 16,
            Self::F64 => 64,
        }
    }

    pub fn from_code(code: i16) -> Option<Self> {
        match code {
            2 => Some(Self::U8),
            4 => Some(Self::I16),
            8 => Some(Self::I32),
            16 => Some(Self::F32),
            64 => Some(Self::F64),
            _ => None,
        }
    }

    pub fn bytes(self) -> usize {
        match self {
            Self::U8 => 1,
            Self::I16 => 2,
            Self::I32 => 4,
            Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn bitpix(self) -> i16 {
        (self.bytes() * 8) as i16
    }
}

/// Header fields preserved for round-trip fidelity and provenance. The
/// orientation fields are opaque to this library.
#[derive(Debug, Clone, PartialEq)]
pub struct NiftiMeta {
    pub datatype: DataType,
    pub vox_offset: u32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub qform_code: i16,
    pub sform_code: i16,
    /// quatern_b, quatern_c, quatern_d, qoffset_x, qoffset_y, qoffset_z
    pub quatern: [f32; 6],
    /// srow_x, srow_y, srow_z
    pub srow: [[f32; 4]; 3],
}

fn open_reader(path: &Path) -> Result<Box<dyn Read>, VolioError> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic)?;
    // re-open to start from byte 0; sniffing only decides the decoder
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(MultiGzDecoder::new(reader)))
    } else {
        Ok(Box::new(reader))
    }
}

/// Reads a NIfTI-1 volume. Values are converted to f64 and `scl_slope` /
/// `scl_inter` are applied when the slope is nonzero. Dims come from
/// `dim[1..3]` and spacing from `pixdim[1..3]`.
pub fn read_nifti(path: impl AsRef<Path>) -> Result<(VolumeGrid, NiftiMeta), VolioError> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;

    let mut hdr = [0u8; HEADER_LEN];
    reader.read_exact(&mut hdr).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            VolioError::Format(format!("{}: shorter than a 348-byte header", path.display()))
        } else {
            VolioError::Io(e)
        }
    })?;

    if &hdr[128..132] == b"DICM" {
        return Err(VolioError::Unsupported("DICOM input".into()));
    }
    let sizeof_hdr = LittleEndian::read_i32(&hdr[0..4]);
    if sizeof_hdr != HEADER_LEN as i32 {
        if sizeof_hdr == 540 {
            return Err(VolioError::Unsupported("NIfTI-2 (540-byte header)".into()));
        }
        if sizeof_hdr.swap_bytes() == HEADER_LEN as i32 {
            return Err(VolioError::Unsupported("big-endian NIfTI-1".into()));
        }
        return Err(VolioError::Format(format!(
            "sizeof_hdr = {sizeof_hdr}, expected 348"
        )));
    }
    let magic = &hdr[344..348];
    if magic != MAGIC {
        if magic == b"ni1\0" {
            return Err(VolioError::Unsupported(
                "two-file (.hdr/.img) NIfTI-1 layout".into(),
            ));
        }
        return Err(VolioError::Format(format!(
            "bad magic {:?}, expected \"n+1\\0\"",
            &magic
        )));
    }

    let ndim = LittleEndian::read_i16(&hdr[40..42]);
    if !(1..=7).contains(&ndim) {
        return Err(VolioError::Format(format!("dim[0] = {ndim} out of range")));
    }
    let mut dim = [1i16; 7];
    for (i, d) in dim.iter_mut().enumerate().take(ndim as usize) {
        *d = LittleEndian::read_i16(&hdr[42 + 2 * i..44 + 2 * i]);
    }
    for (i, &d) in dim.iter().enumerate().take(ndim as usize) {
        if i < 3 {
            if d < 1 {
                return Err(VolioError::Format(format!("dim[{}] = {d} must be >= 1", i + 1)));
            }
        } else if d > 1 {
            return Err(VolioError::Unsupported(format!(
                "{}-dimensional volume (dim[{}] = {d}); only 3-D supported",
                ndim,
                i + 1
            )));
        }
    }
    let dims = (dim[0] as usize, dim[1] as usize, dim[2] as usize);

    let datatype_code = LittleEndian::read_i16(&hdr[70..72]);
    let datatype = DataType::from_code(datatype_code)
        .ok_or_else(|| VolioError::Unsupported(format!("datatype code {datatype_code}")))?;

    let mut pixdim = [0f32; 4];
    LittleEndian::read_f32_into(&hdr[76..92], &mut pixdim);
    let spacing = (pixdim[1] as f64, pixdim[2] as f64, pixdim[3] as f64);
    if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.2 > 0.0) {
        return Err(VolioError::Format(format!(
            "non-positive pixdim {:?}",
            &pixdim[1..4]
        )));
    }

    let vox_offset = LittleEndian::read_f32(&hdr[108..112]);
    if !vox_offset.is_finite() || vox_offset < VOX_OFFSET as f32 || vox_offset.fract() != 0.0 {
        return Err(VolioError::Format(format!("vox_offset = {vox_offset}")));
    }
    let vox_offset = vox_offset as u32;

    let scl_slope = LittleEndian::read_f32(&hdr[112..116]);
    let scl_inter = LittleEndian::read_f32(&hdr[116..120]);

    let mut quatern = [0f32; 6];
    LittleEndian::read_f32_into(&hdr[256..280], &mut quatern);
    let mut srow = [[0f32; 4]; 3];
    for (r, row) in srow.iter_mut().enumerate() {
        LittleEndian::read_f32_into(&hdr[280 + 16 * r..296 + 16 * r], row);
    }
    let meta = NiftiMeta {
        datatype,
        vox_offset,
        scl_slope,
        scl_inter,
        qform_code: LittleEndian::read_i16(&hdr[252..254]),
        sform_code: LittleEndian::read_i16(&hdr[254..256]),
        quatern,
        srow,
    };

    // skip any extension bytes between header and data
    let mut skip = vox_offset as usize - HEADER_LEN;
    let mut scratch = [0u8; 4096];
    while skip > 0 {
        let n = reader.read(&mut scratch[..skip.min(4096)])?;
        if n == 0 {
            return Err(VolioError::Io(io::Error::new(
                io::ErrorKind::UnexpectedEof,
                "file ends before vox_offset",
            )));
        }
        skip -= n;
    }

    let nvox = dims.0 * dims.1 * dims.2;
    let mut raw = vec![0u8; nvox * datatype.bytes()];
    reader.read_exact(&mut raw).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            VolioError::Io(io::Error::new(
                io::ErrorKind::UnexpectedEof,
                format!("truncated payload: expected {} data bytes", raw.len()),
            ))
        } else {
            VolioError::Io(e)
        }
    })?;

    let mut data = vec![0f64; nvox];
    match datatype {
        DataType::U8 => {
            for (v, b) in data.iter_mut().zip(raw.iter()) {
                *v = *b as f64;
            }
        }
        DataType::I16 => {
            for (i, v) in data.iter_mut().enumerate() {
                *v = LittleEndian::read_i16(&raw[2 * i..]) as f64;
            }
        }
        DataType::I32 => {
            for (i, v) in data.iter_mut().enumerate() {
                *v = LittleEndian::read_i32(&raw[4 * i..]) as f64;
            }
        }
        DataType::F32 => {
            for (i, v) in data.iter_mut().enumerate() {
                *v = LittleEndian::read_f32(&raw[4 * i..]) as f64;
            }
        }
        DataType::F64 => {
            LittleEndian::read_f64_into(&raw, &mut data);
        }
    }
    if scl_slope != 0.0 && !(scl_slope == 1.0 && scl_inter == 0.0) {
        let (m, c) = (scl_slope as f64, scl_inter as f64);
        for v in &mut data {
            *v = *v * m + c;
        }
    }

    let grid = VolumeGrid::new(dims, spacing, ValueKind::Intensity, data)?;
    Ok((grid, meta))
}

fn default_datatype(kind: ValueKind) -> DataType {
    match kind {
        // label/atlas alphabets fit a byte; intensity defaults to the
        // lossless representation of the in-memory values
        ValueKind::Label | ValueKind::Atlas => DataType::U8,
        ValueKind::Intensity => DataType::F64,
    }
}

/// Writes a grid with a datatype chosen from its value kind (labels and
/// atlases as uint8, intensities as float64). Paths ending in `.gz` are
/// gzip-compressed.
pub fn write_nifti(grid: &VolumeGrid, path: impl AsRef<Path>) -> Result<(), VolioError> {
    write_nifti_as(grid, path, default_datatype(grid.value_kind()))
}

/// Writes a grid with an explicit on-disk datatype. Integer datatypes
/// require every value to be exactly representable; float32 rounds.
pub fn write_nifti_as(
    grid: &VolumeGrid,
    path: impl AsRef<Path>,
    datatype: DataType,
) -> Result<(), VolioError> {
    let path = path.as_ref();
    let file = File::create(path)?;
    let gz = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    if gz {
        let mut w = BufWriter::new(GzEncoder::new(file, flate2::Compression::fast()));
        write_stream(grid, &mut w, datatype)?;
        w.into_inner()
            .map_err(|e| VolioError::Io(e.into_error()))?
            .finish()?;
    } else {
        let mut w = BufWriter::new(file);
        write_stream(grid, &mut w, datatype)?;
        w.flush()?;
    }
    Ok(())
}

fn write_stream<W: Write>(
    grid: &VolumeGrid,
    w: &mut W,
    datatype: DataType,
) -> Result<(), VolioError> {
    let mut hdr = [0u8; HEADER_LEN];
    LittleEndian::write_i32(&mut hdr[0..4], HEADER_LEN as i32);
    hdr[39] = b'r'; // "regular" flag, kept for compatibility
    let dims = grid.dims();
    let dim: [i16; 8] = [3, dims.0 as i16, dims.1 as i16, dims.2 as i16, 1, 1, 1, 1];
    for (i, d) in dim.iter().enumerate() {
        LittleEndian::write_i16(&mut hdr[40 + 2 * i..], *d);
    }
    LittleEndian::write_i16(&mut hdr[70..72], datatype.code());
    LittleEndian::write_i16(&mut hdr[72..74], datatype.bitpix());
    let spacing = grid.spacing();
    let pixdim: [f32; 8] = [
        1.0,
        spacing.0 as f32,
        spacing.1 as f32,
        spacing.2 as f32,
        0.0,
        0.0,
        0.0,
        0.0,
    ];
    for (i, p) in pixdim.iter().enumerate() {
        LittleEndian::write_f32(&mut hdr[76 + 4 * i..], *p);
    }
    LittleEndian::write_f32(&mut hdr[108..112], VOX_OFFSET as f32);
    // scl_slope = 0 means "no scaling"
    LittleEndian::write_f32(&mut hdr[112..116], 0.0);
    LittleEndian::write_f32(&mut hdr[116..120], 0.0);
    hdr[123] = UNITS_MM;
    hdr[344..348].copy_from_slice(MAGIC);
    w.write_all(&hdr)?;
    w.write_all(&[0u8; (VOX_OFFSET as usize) - HEADER_LEN])?;

    for &v in grid.data() {
        match datatype {
            DataType::U8 => {
                if v.fract() != 0.0 || !(0.0..=u8::MAX as f64).contains(&v) {
                    return Err(VolioError::NotRepresentable { value: v, datatype });
                }
                w.write_u8(v as u8)?;
            }
            DataType::I16 => {
                if v.fract() != 0.0 || !((i16::MIN as f64)..=(i16::MAX as f64)).contains(&v) {
                    return Err(VolioError::NotRepresentable { value: v, datatype });
                }
                w.write_i16::<LittleEndian>(v as i16)?;
            }
            DataType::I32 => {
                if v.fract() != 0.0 || !((i32::MIN as f64)..=(i32::MAX as f64)).contains(&v) {
                    return Err(VolioError::NotRepresentable { value: v, datatype });
                }
                w.write_i32::<LittleEndian>(v as i32)?;
            }
            DataType::F32 => w.write_f32::<LittleEndian>(v as f32)?,
            DataType::F64 => w.write_f64::<LittleEndian>(v)?,
        }
    }
    Ok(())
}
