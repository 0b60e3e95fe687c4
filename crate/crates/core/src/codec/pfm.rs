//! Portable float map (`Pf`) reading and writing.
//!
//! On disk rows run bottom-to-top and the sign of the scale line selects
//! the byte order (negative means little-endian). In memory everything is
//! top-down.

use std::fs;
use std::path::Path;

use crate::error::CodecError;
use crate::raster::{is_valid_disparity, CostMap, DisparityMap, INVALID_DISPARITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endian {
    Little,
    Big,
}

/// Middlebury-style ground truth. Non-finite samples on disk (`+inf` in
/// practice) are recorded in the invalid mask.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthDisparity {
    width: usize,
    height: usize,
    values: Vec<f32>,
    invalid: Vec<bool>,
}

impl GroundTruthDisparity {
    /// Builds ground truth from raw samples, masking every non-finite one.
    pub fn from_samples(width: usize, height: usize, values: Vec<f32>) -> Result<Self, CodecError> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(CodecError::Raster(crate::error::RasterError::LengthMismatch {
                needed: width * height,
                got: values.len(),
            }));
        }
        let invalid: Vec<bool> = values.iter().map(|v| !v.is_finite()).collect();
        if let Some(index) = values.iter().position(|v| v.is_finite() && *v < 0.0) {
            return Err(CodecError::NegativeDisparity {
                index,
                value: values[index],
            });
        }
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v } else { 0.0 })
            .collect();
        Ok(Self {
            width,
            height,
            values,
            invalid,
        })
    }

    pub fn from_map(map: &DisparityMap) -> Result<Self, CodecError> {
        Self::from_samples(map.width(), map.height(), map.as_slice().to_vec())
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Disparity at a pixel, or `None` where the mask is set.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<f32> {
        let i = row * self.width + col;
        (!self.invalid[i]).then_some(self.values[i])
    }

    pub fn invalid_mask(&self) -> &[bool] {
        &self.invalid
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn invalid_count(&self) -> usize {
        self.invalid.iter().filter(|m| **m).count()
    }
}

/// Decodes a grayscale PFM into `(width, height, top-down samples)`.
pub fn decode_pfm_samples(bytes: &[u8]) -> Result<(usize, usize, Vec<f32>), CodecError> {
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            break;
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        if fields.len() == 1 && fields[0] != "Pf" {
            return Err(CodecError::BadMagic(fields[0].clone()));
        }
    }
    if fields.is_empty() {
        return Err(CodecError::BadMagic(String::new()));
    }
    if fields.len() < 4 {
        return Err(CodecError::MalformedHeader("incomplete PFM header".into()));
    }
    let dim = |s: &str, what: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|v| *v > 0)
            .ok_or_else(|| CodecError::MalformedHeader(format!("bad {what} {s:?}")))
    };
    let width = dim(&fields[1], "width")?;
    let height = dim(&fields[2], "height")?;
    let scale: f64 = fields[3]
        .parse()
        .map_err(|_| CodecError::MalformedHeader(format!("bad scale {:?}", fields[3])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(CodecError::ZeroScale);
    }
    let endian = if scale < 0.0 { Endian::Little } else { Endian::Big };

    // single whitespace byte after the scale field
    let start = pos + 1;
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| CodecError::MalformedHeader("dimensions overflow".into()))?;
    let payload = bytes.get(start..).unwrap_or(&[]);
    if payload.len() < expected {
        return Err(CodecError::Truncated {
            expected,
            found: payload.len(),
        });
    }

    let mut values = vec![0f32; width * height];
    for (disk_row, chunk) in payload[..expected].chunks_exact(width * 4).enumerate() {
        let row = height - 1 - disk_row;
        for (col, b) in chunk.chunks_exact(4).enumerate() {
            let raw = [b[0], b[1], b[2], b[3]];
            values[row * width + col] = match endian {
                Endian::Little => f32::from_le_bytes(raw),
                Endian::Big => f32::from_be_bytes(raw),
            };
        }
    }
    Ok((width, height, values))
}

/// Encodes top-down samples as a grayscale PFM with the requested byte order.
pub fn encode_pfm_samples(width: usize, height: usize, values: &[f32], endian: Endian) -> Vec<u8> {
    debug_assert_eq!(values.len(), width * height);
    let scale = match endian {
        Endian::Little => "-1.0",
        Endian::Big => "1.0",
    };
    let mut out = format!("Pf\n{width} {height}\n{scale}\n").into_bytes();
    out.reserve(values.len() * 4);
    for row in (0..height).rev() {
        for &v in &values[row * width..(row + 1) * width] {
            out.extend_from_slice(&match endian {
                Endian::Little => v.to_le_bytes(),
                Endian::Big => v.to_be_bytes(),
            });
        }
    }
    out
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<GroundTruthDisparity, CodecError> {
    decode_pfm(&fs::read(path)?)
}

pub fn decode_pfm(bytes: &[u8]) -> Result<GroundTruthDisparity, CodecError> {
    let (w, h, values) = decode_pfm_samples(bytes)?;
    GroundTruthDisparity::from_samples(w, h, values)
}

/// Reads a PFM disparity map; non-finite samples become [`INVALID_DISPARITY`].
pub fn read_pfm_disparity(path: impl AsRef<Path>) -> Result<DisparityMap, CodecError> {
    let (w, h, values) = decode_pfm_samples(&fs::read(path)?)?;
    let values = values
        .into_iter()
        .map(|v| if v.is_finite() { v } else { INVALID_DISPARITY })
        .collect();
    Ok(DisparityMap::new(w, h, values)?)
}

pub fn encode_disparity_pfm(map: &DisparityMap) -> Vec<u8> {
    let values: Vec<f32> = map
        .as_slice()
        .iter()
        .map(|&d| if is_valid_disparity(d) { d } else { f32::INFINITY })
        .collect();
    encode_pfm_samples(map.width(), map.height(), &values, Endian::Little)
}

pub fn write_pfm(map: &DisparityMap, path: impl AsRef<Path>) -> Result<(), CodecError> {
    fs::write(path, encode_disparity_pfm(map))?;
    Ok(())
}

pub fn write_cost_pfm(cost: &CostMap, path: impl AsRef<Path>) -> Result<(), CodecError> {
    let values: Vec<f32> = cost.as_slice().iter().map(|&c| c as f32).collect();
    fs::write(
        path,
        encode_pfm_samples(cost.width(), cost.height(), &values, Endian::Little),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_pixel(v: f32) -> Vec<u8> {
        encode_pfm_samples(1, 1, &[v], Endian::Little)
    }

    #[test]
    fn single_value() {
        let gt = decode_pfm(&one_pixel(5.0)).unwrap();
        assert_eq!(gt.get(0, 0), Some(5.0));
        assert_eq!(gt.invalid_count(), 0);
    }

    #[test]
    fn infinity_is_masked() {
        let gt = decode_pfm(&one_pixel(f32::INFINITY)).unwrap();
        assert_eq!(gt.get(0, 0), None);
        assert!(gt.invalid_mask()[0]);
    }

    #[test]
    fn rows_are_bottom_up_on_disk() {
        let bytes = encode_pfm_samples(1, 2, &[1.0, 2.0], Endian::Little);
        let payload = &bytes[bytes.len() - 8..];
        assert_eq!(&payload[..4], &2.0f32.to_le_bytes());
        let (_, _, back) = decode_pfm_samples(&bytes).unwrap();
        assert_eq!(back, vec![1.0, 2.0]);
    }

    #[test]
    fn big_endian_decodes() {
        let vals = [0.5f32, -3.25, 7.0, 1e-7, 2.0, 9.5];
        let be = encode_pfm_samples(3, 2, &vals, Endian::Big);
        let le = encode_pfm_samples(3, 2, &vals, Endian::Little);
        assert_ne!(be, le);
        assert_eq!(decode_pfm_samples(&be).unwrap().2, vals);
        assert_eq!(decode_pfm_samples(&le).unwrap().2, vals);
    }

    #[test]
    fn header_errors() {
        assert!(matches!(decode_pfm(b"PF\n1 1\n-1\n"), Err(CodecError::BadMagic(_))));
        assert!(matches!(decode_pfm(b"P5\n1 1\n-1\n"), Err(CodecError::BadMagic(_))));
        assert!(matches!(
            decode_pfm(b"Pf\n1 1\n0.0\n\0\0\0\0"),
            Err(CodecError::ZeroScale)
        ));
        assert!(matches!(
            decode_pfm(b"Pf\n2 1\n-1.0\n\0\0\0\0"),
            Err(CodecError::Truncated { expected: 8, found: 4 })
        ));
        assert!(matches!(
            decode_pfm(b"Pf\n2\n"),
            Err(CodecError::MalformedHeader(_))
        ));
    }

    #[test]
    fn negative_ground_truth_rejected() {
        assert!(matches!(
            decode_pfm(&one_pixel(-1.0)),
            Err(CodecError::NegativeDisparity { .. })
        ));
    }

    #[test]
    fn invalid_disparity_written_as_infinity() {
        let map = DisparityMap::new(2, 1, vec![3.0, INVALID_DISPARITY]).unwrap();
        let (_, _, raw) = decode_pfm_samples(&encode_disparity_pfm(&map)).unwrap();
        assert_eq!(raw[1], f32::INFINITY);
    }
}
