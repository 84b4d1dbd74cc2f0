//! Binary PGM (P5) images: 16-bit big-endian depth in millimeters and
//! 8-bit 0/255 instance masks.

use std::path::Path;

use crate::datagen::{DepthImage, InstanceMask};
use crate::error::{Error, Result};

pub fn encode_depth(depth: &DepthImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", depth.width(), depth.height()).into_bytes();
    for v in depth.values() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

pub fn encode_mask(mask: &InstanceMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.values().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn write_depth(path: &Path, depth: &DepthImage) -> Result<()> {
    std::fs::write(path, encode_depth(depth)).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_mask(path: &Path, mask: &InstanceMask) -> Result<()> {
    std::fs::write(path, encode_mask(mask)).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn decode_depth(bytes: &[u8]) -> Result<DepthImage> {
    let (width, height, maxval, data) = parse_header(bytes)?;
    if maxval != 65535 {
        return Err(Error::PgmParse {
            message: format!("expected 16-bit depth (maxval 65535), got {maxval}"),
        });
    }
    if data.len() != width * height * 2 {
        return Err(Error::PgmParse {
            message: format!("expected {} data bytes, got {}", width * height * 2, data.len()),
        });
    }
    let values = data
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    DepthImage::new(width, height, values)
}

pub fn decode_mask(bytes: &[u8]) -> Result<InstanceMask> {
    let (width, height, maxval, data) = parse_header(bytes)?;
    if maxval != 255 {
        return Err(Error::PgmParse {
            message: format!("expected 8-bit mask (maxval 255), got {maxval}"),
        });
    }
    if data.len() != width * height {
        return Err(Error::PgmParse {
            message: format!("expected {} data bytes, got {}", width * height, data.len()),
        });
    }
    InstanceMask::new(width, height, data.iter().map(|&b| b != 0).collect())
}

pub fn read_depth(path: &Path) -> Result<DepthImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    decode_depth(&bytes)
}

pub fn read_mask(path: &Path) -> Result<InstanceMask> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    decode_mask(&bytes)
}

/// Reads "P5\n<w> <h>\n<maxval>\n" allowing arbitrary whitespace between
/// tokens; returns the remaining raster bytes.
fn parse_header(bytes: &[u8]) -> Result<(usize, usize, u32, &[u8])> {
    let fail = |message: &str| Error::PgmParse { message: message.into() };
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(fail("missing P5 magic"));
    }
    let mut pos = 2usize;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(fail("truncated header"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).map_err(|_| fail("invalid header"))?;
        *field = text.parse().map_err(|_| fail("invalid header number"))?;
    }
    // single whitespace byte separates header from raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(fail("missing raster separator"));
    }
    pos += 1;
    Ok((fields[0] as usize, fields[1] as usize, fields[2], &bytes[pos..]))
}
