//! Binary grid files and CSV curve files.
//!
//! Grid layout (all integers little-endian):
//!
//! | bytes            | field                                   |
//! |------------------|-----------------------------------------|
//! | 4                | magic `ECCG`                            |
//! | 1                | version: 1 = f32 samples, 2 = i32 coeffs|
//! | 1                | ndim, 2 or 3                            |
//! | 2                | reserved, 0                             |
//! | 8 × ndim         | extents as u64                          |
//! | 4 × product(dims)| samples, row-major                      |
//!
//! Curve files are CSV with the header `threshold,chi`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::coeff::CoefficientGrid;
use crate::error::{EccError, Result};
use crate::grid::{CurveValue, Dims, EulerCurve, ScalarGrid, ThresholdSet};

pub const MAGIC: &[u8; 4] = b"ECCG";
pub const VERSION_SCALAR: u8 = 1;
pub const VERSION_COEFF: u8 = 2;

const FIXED_HEADER: usize = 8;

struct Header {
    version: u8,
    dims: Dims,
    payload_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < FIXED_HEADER {
        return Err(EccError::Format(format!(
            "file is {} bytes, shorter than the {FIXED_HEADER}-byte header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(EccError::Format(format!("bad magic {:02x?}", &bytes[0..4])));
    }
    let version = bytes[4];
    if version != VERSION_SCALAR && version != VERSION_COEFF {
        return Err(EccError::Format(format!("unsupported version {version}")));
    }
    let ndim = bytes[5] as usize;
    if ndim != 2 && ndim != 3 {
        return Err(EccError::Format(format!("ndim must be 2 or 3, got {ndim}")));
    }
    if bytes[6] != 0 || bytes[7] != 0 {
        return Err(EccError::Format("reserved header bytes are non-zero".into()));
    }
    let payload_offset = FIXED_HEADER + 8 * ndim;
    if bytes.len() < payload_offset {
        return Err(EccError::Format("truncated extents".into()));
    }
    let mut extents = Vec::with_capacity(ndim);
    for chunk in bytes[FIXED_HEADER..payload_offset].chunks_exact(8) {
        let raw = u64::from_le_bytes(chunk.try_into().unwrap());
        let d = usize::try_from(raw)
            .map_err(|_| EccError::Capacity(format!("extent {raw} does not fit in memory")))?;
        extents.push(d);
    }
    let dims = Dims::new(&extents).map_err(|e| match e {
        EccError::Validation(msg) => EccError::Format(msg),
        other => other,
    })?;
    Ok(Header {
        version,
        dims,
        payload_offset,
    })
}

fn check_payload(header: &Header, bytes: &[u8]) -> Result<()> {
    let expected = header.dims.len() * 4;
    let found = bytes.len() - header.payload_offset;
    if expected != found {
        return Err(EccError::Corruption { expected, found });
    }
    Ok(())
}

fn encode_header(version: u8, dims: &Dims, payload_len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(FIXED_HEADER + 8 * dims.ndim() + payload_len);
    out.extend_from_slice(MAGIC);
    out.push(version);
    out.push(dims.ndim() as u8);
    out.extend_from_slice(&0u16.to_le_bytes());
    for &d in dims.as_slice() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out
}

/// Decodes a version-1 grid file held in memory.
pub fn decode_grid(bytes: &[u8]) -> Result<ScalarGrid> {
    let header = parse_header(bytes)?;
    if header.version != VERSION_SCALAR {
        return Err(EccError::Format(format!(
            "expected a scalar grid (version {VERSION_SCALAR}), found version {}",
            header.version
        )));
    }
    check_payload(&header, bytes)?;
    let values: Vec<f32> = bytes[header.payload_offset..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ScalarGrid::from_f32(header.dims.as_slice(), &values)
}

/// Encodes a grid as a version-1 file. Values are narrowed to `f32`.
pub fn encode_grid(grid: &ScalarGrid) -> Result<Vec<u8>> {
    let mut out = encode_header(VERSION_SCALAR, grid.dims(), grid.len() * 4);
    for (i, &v) in grid.values().iter().enumerate() {
        let narrowed = v as f32;
        if !narrowed.is_finite() {
            return Err(EccError::Validation(format!(
                "value {v} at linear index {i} overflows f32"
            )));
        }
        out.extend_from_slice(&narrowed.to_le_bytes());
    }
    Ok(out)
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<ScalarGrid> {
    decode_grid(&fs::read(path)?)
}

pub fn write_grid(grid: &ScalarGrid, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_grid(grid)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn encode_coefficients(coeffs: &CoefficientGrid) -> Vec<u8> {
    let mut out = encode_header(VERSION_COEFF, coeffs.dims(), coeffs.len() * 4);
    for &c in coeffs.coeffs() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

pub fn decode_coefficients(bytes: &[u8]) -> Result<CoefficientGrid> {
    let header = parse_header(bytes)?;
    if header.version != VERSION_COEFF {
        return Err(EccError::Format(format!(
            "expected a coefficient grid (version {VERSION_COEFF}), found version {}",
            header.version
        )));
    }
    check_payload(&header, bytes)?;
    let coeffs = bytes[header.payload_offset..]
        .chunks_exact(4)
        .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    CoefficientGrid::from_raw(header.dims.as_slice(), coeffs)
}

pub fn write_coefficients(coeffs: &CoefficientGrid, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_coefficients(coeffs))?;
    Ok(())
}

pub fn read_coefficients(path: impl AsRef<Path>) -> Result<CoefficientGrid> {
    decode_coefficients(&fs::read(path)?)
}

/// Writes `threshold,chi` rows. Thresholds use the shortest representation
/// that parses back to the same `f64`.
pub fn write_curve_to<V: CurveValue, W: Write>(curve: &EulerCurve<V>, writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["threshold", "chi"])?;
    for (tau, chi) in curve.iter() {
        csv.write_record([tau.to_string(), chi.to_csv_field()])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_curve<V: CurveValue>(curve: &EulerCurve<V>, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_curve_to(curve, BufWriter::new(file))
}

/// Parses thresholds from the first column of a CSV file. A non-numeric
/// first row is treated as a header, so curve files are accepted as-is.
pub fn parse_thresholds(text: &str) -> Result<ThresholdSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut taus = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let Some(field) = record.get(0).filter(|f| !f.is_empty()) else {
            continue;
        };
        match field.parse::<f64>() {
            Ok(t) => taus.push(t),
            Err(_) if row == 0 => continue,
            Err(_) => {
                return Err(EccError::Format(format!(
                    "row {}: cannot parse threshold {field:?}",
                    row + 1
                )))
            }
        }
    }
    ThresholdSet::new(taus)
}

pub fn read_thresholds(path: impl AsRef<Path>) -> Result<ThresholdSet> {
    parse_thresholds(&fs::read_to_string(path)?)
}
