//! PGM/PPM (P2, P3, P5, P6) decoding to [`GrayImage`] and P5 encoding.

use std::fs;
use std::path::Path;

use crate::error::CodecError;
use crate::raster::{is_valid_disparity, DisparityMap, GrayImage};

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    AsciiGray,
    AsciiColor,
    BinaryGray,
    BinaryColor,
}

impl Kind {
    fn channels(self) -> usize {
        match self {
            Kind::AsciiGray | Kind::BinaryGray => 1,
            Kind::AsciiColor | Kind::BinaryColor => 3,
        }
    }
}

/// Byte cursor over a netpbm header: whitespace separated tokens with `#`
/// comments running to end of line.
struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u64, CodecError> {
        let tok = self
            .token()
            .ok_or_else(|| CodecError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| {
                CodecError::MalformedHeader(format!(
                    "{what} is not a number: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Reads a PGM or PPM file into a normalized grayscale image.
pub fn read_pgm_pnm(path: impl AsRef<Path>) -> Result<GrayImage, CodecError> {
    decode_pnm(&fs::read(path)?)
}

/// Decodes PGM/PPM bytes. Samples are divided by maxval; color samples are
/// reduced to luminance `0.299 R + 0.587 G + 0.114 B`.
pub fn decode_pnm(bytes: &[u8]) -> Result<GrayImage, CodecError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(CodecError::MalformedHeader("missing P magic".into()));
    }
    let kind = match bytes[1] {
        b'2' => Kind::AsciiGray,
        b'3' => Kind::AsciiColor,
        b'5' => Kind::BinaryGray,
        b'6' => Kind::BinaryColor,
        other => {
            return Err(CodecError::MalformedHeader(format!(
                "unsupported netpbm variant P{}",
                other as char
            )))
        }
    };
    if bytes.len() > 2 && !bytes[2].is_ascii_whitespace() && bytes[2] != b'#' {
        return Err(CodecError::MalformedHeader("magic not followed by whitespace".into()));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(CodecError::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(CodecError::BadMaxval(maxval));
    }

    let channels = kind.channels();
    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| CodecError::MalformedHeader("dimensions overflow".into()))?;

    let samples: Vec<u64> = match kind {
        Kind::AsciiGray | Kind::AsciiColor => {
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let Some(tok) = cur.token() else {
                    return Err(CodecError::Truncated {
                        expected: count,
                        found: out.len(),
                    });
                };
                let v = std::str::from_utf8(tok)
                    .ok()
                    .and_then(|s| s.parse::<u64>().ok())
                    .ok_or_else(|| {
                        CodecError::MalformedHeader(format!(
                            "bad ASCII sample {:?}",
                            String::from_utf8_lossy(tok)
                        ))
                    })?;
                out.push(v);
            }
            out
        }
        Kind::BinaryGray | Kind::BinaryColor => {
            // exactly one whitespace byte separates maxval from the raster
            let start = cur.pos + 1;
            let bytes_per = if maxval < 256 { 1 } else { 2 };
            let expected = count * bytes_per;
            let payload = bytes.get(start..).unwrap_or(&[]);
            if payload.len() < expected {
                return Err(CodecError::Truncated {
                    expected,
                    found: payload.len(),
                });
            }
            if bytes_per == 1 {
                payload[..count].iter().map(|&b| u64::from(b)).collect()
            } else {
                payload[..expected]
                    .chunks_exact(2)
                    .map(|c| u64::from(u16::from_be_bytes([c[0], c[1]])))
                    .collect()
            }
        }
    };

    if let Some(&value) = samples.iter().find(|&&v| v > maxval) {
        return Err(CodecError::SampleOutOfRange { value, maxval });
    }

    let scale = maxval as f64;
    let data: Vec<f64> = if channels == 1 {
        samples.iter().map(|&v| v as f64 / scale).collect()
    } else {
        samples
            .chunks_exact(3)
            .map(|px| {
                let y = LUMA_R * px[0] as f64 + LUMA_G * px[1] as f64 + LUMA_B * px[2] as f64;
                (y / scale).clamp(0.0, 1.0)
            })
            .collect()
    };
    Ok(GrayImage::new(width, height, data)?)
}

fn check_maxval(maxval: u16) -> Result<(), CodecError> {
    if maxval == 0 {
        return Err(CodecError::BadMaxval(0));
    }
    Ok(())
}

fn encode_p5(width: usize, height: usize, maxval: u16, samples: impl Iterator<Item = u16>) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    let wide = maxval > 255;
    out.reserve(width * height * if wide { 2 } else { 1 });
    for s in samples {
        if wide {
            out.extend_from_slice(&s.to_be_bytes());
        } else {
            out.push(s as u8);
        }
    }
    out
}

/// Encodes an intensity image as binary PGM, mapping `[0, 1]` to `[0, maxval]`.
pub fn encode_pgm(image: &GrayImage, maxval: u16) -> Result<Vec<u8>, CodecError> {
    check_maxval(maxval)?;
    let m = f64::from(maxval);
    let samples = image
        .as_slice()
        .iter()
        .map(move |&v| (v * m).round().clamp(0.0, m) as u16);
    Ok(encode_p5(image.width(), image.height(), maxval, samples))
}

pub fn write_pgm(image: &GrayImage, path: impl AsRef<Path>, maxval: u16) -> Result<(), CodecError> {
    fs::write(path, encode_pgm(image, maxval)?)?;
    Ok(())
}

/// Encodes a disparity preview: `[0, d_max]` maps linearly onto
/// `[0, maxval]`; invalid pixels become 0.
pub fn encode_disparity_pgm(map: &DisparityMap, d_max: u32, maxval: u16) -> Result<Vec<u8>, CodecError> {
    check_maxval(maxval)?;
    if d_max == 0 {
        return Err(CodecError::InvalidValue {
            key: "d_max".into(),
            value: "0".into(),
        });
    }
    let m = f64::from(maxval);
    let top = f64::from(d_max);
    let samples = map.as_slice().iter().map(move |&d| {
        if is_valid_disparity(d) {
            // product first: exact for integer disparities, so ties round up
            (f64::from(d) * m / top).round().clamp(0.0, m) as u16
        } else {
            0
        }
    });
    Ok(encode_p5(map.width(), map.height(), maxval, samples))
}

pub fn write_disparity_pgm(
    map: &DisparityMap,
    path: impl AsRef<Path>,
    d_max: u32,
    maxval: u16,
) -> Result<(), CodecError> {
    fs::write(path, encode_disparity_pgm(map, d_max, maxval)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::INVALID_DISPARITY;

    #[test]
    fn p5_normalizes_by_maxval() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 128, 64]);
        let img = decode_pnm(&bytes).unwrap();
        assert_eq!(img.dims(), (2, 2));
        let expect = [0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0];
        for (a, b) in img.as_slice().iter().zip(expect) {
            assert_eq!(*a, b);
        }
        assert!((img.get(1, 0) - 0.50196).abs() < 1e-5);
        assert!((img.get(1, 1) - 0.25098).abs() < 1e-5);
    }

    #[test]
    fn ascii_and_binary_agree() {
        let ascii = b"P2\n# a comment\n2 2\n255\n0 255\n128 64\n";
        let mut bin = b"P5 2 2 255\n".to_vec();
        bin.extend_from_slice(&[0, 255, 128, 64]);
        assert_eq!(decode_pnm(ascii).unwrap(), decode_pnm(&bin).unwrap());
    }

    #[test]
    fn sixteen_bit_big_endian() {
        let mut bytes = b"P5\n2 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0xff, 0xff, 0x80, 0x00]);
        let img = decode_pnm(&bytes).unwrap();
        assert_eq!(img.get(0, 0), 1.0);
        assert_eq!(img.get(0, 1), 32768.0 / 65535.0);
    }

    #[test]
    fn color_to_luminance() {
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 10, 20, 30]);
        let img = decode_pnm(&bytes).unwrap();
        assert!((img.get(0, 0) - 0.299).abs() < 1e-12);
        let y = (0.299 * 10.0 + 0.587 * 20.0 + 0.114 * 30.0) / 255.0;
        assert!((img.get(0, 1) - y).abs() < 1e-12);

        let ascii = b"P3\n2 1\n255\n255 0 0 10 20 30\n";
        assert_eq!(decode_pnm(ascii).unwrap(), img);
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            decode_pnm(b"P5\n2 x\n255\n"),
            Err(CodecError::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_pnm(b"P7\n2 2\n255\n"),
            Err(CodecError::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_pnm(b"P5\n2 2\n255\n\x01\x02"),
            Err(CodecError::Truncated { expected: 4, found: 2 })
        ));
        assert!(matches!(
            decode_pnm(b"P2\n2 2\n255\n1 2 3"),
            Err(CodecError::Truncated { .. })
        ));
        assert!(matches!(
            decode_pnm(b"P5\n1 1\n0\n\x00"),
            Err(CodecError::BadMaxval(0))
        ));
        assert!(matches!(
            decode_pnm(b"P5\n1 1\n70000\n\x00\x00"),
            Err(CodecError::BadMaxval(70000))
        ));
        assert!(matches!(
            decode_pnm(b"P2\n1 1\n10\n11\n"),
            Err(CodecError::SampleOutOfRange { value: 11, maxval: 10 })
        ));
    }

    #[test]
    fn disparity_preview_scales_linearly() {
        let map = DisparityMap::filled(3, 2, 10.0).unwrap();
        let bytes = encode_disparity_pgm(&map, 64, 255).unwrap();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert!(bytes[header.len()..].iter().all(|&b| b == 40));
    }

    #[test]
    fn disparity_preview_invalid_is_black() {
        let map = DisparityMap::new(2, 1, vec![INVALID_DISPARITY, 64.0]).unwrap();
        let bytes = encode_disparity_pgm(&map, 64, 255).unwrap();
        assert_eq!(&bytes[bytes.len() - 2..], &[0, 255]);
    }

    #[test]
    fn empty_map_rejected() {
        assert!(DisparityMap::new(0, 0, vec![]).is_err());
    }
}
