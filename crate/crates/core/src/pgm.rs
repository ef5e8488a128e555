//! Binary PGM (P5) reading and writing.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{GrayImage, RegionMask};

fn skip_space_and_comments(bytes: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    *pos = skip_space_and_comments(bytes, *pos);
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Pgm(format!("missing or invalid {what}")))
}

/// Parses a P5 image. Samples are rescaled to 0..=255 when `maxval < 255`.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::Pgm("expected P5 magic".into()));
    }
    let mut pos = 2;
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("unsupported maxval {maxval} (8-bit only)")));
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Pgm("header must end with a single whitespace byte".into()));
    }
    pos += 1;
    let len = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm(format!("{width}x{height} overflows")))?;
    let data = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::Pgm(format!("expected {len} pixel bytes, got {}", bytes.len() - pos)))?;
    if let Some(bad) = data.iter().find(|&&p| p as usize > maxval) {
        return Err(Error::Pgm(format!("sample {bad} exceeds maxval {maxval}")));
    }
    let pixels = if maxval == 255 {
        data.to_vec()
    } else {
        data.iter()
            .map(|&p| ((p as u32 * 255 + maxval as u32 / 2) / maxval as u32) as u8)
            .collect()
    };
    GrayImage::new(height, width, pixels).map_err(|e| Error::Pgm(e.to_string()))
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    decode_pgm(&bytes).map_err(|e| Error::Pgm(format!("{}: {e}", path.display())))
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads a mask image: pixels `>= 128` are simple.
pub fn read_mask(path: impl AsRef<Path>) -> Result<RegionMask> {
    Ok(RegionMask::from_gray(&read_pgm(path)?))
}
