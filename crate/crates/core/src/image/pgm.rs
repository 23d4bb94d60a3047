//! Binary (P5) PGM with maxval 255.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::ImageGrid;
use crate::error::{Error, Result};

pub fn load_pgm(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&bytes).map_err(|reason| Error::Pgm {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn read_pgm(mut reader: impl Read) -> Result<ImageGrid> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(|source| Error::Io {
        path: "<reader>".into(),
        source,
    })?;
    parse(&bytes).map_err(|reason| Error::Pgm {
        path: "<reader>".into(),
        reason,
    })
}

/// Writes `img` as P5, clamping to `[0, 255]` and rounding half away from zero.
pub fn save_pgm(img: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_pgm(img, &mut file).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn write_pgm(img: &ImageGrid, mut writer: impl Write) -> Result<()> {
    let mut buf = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    buf.extend(img.data().iter().map(|&v| quantize(v)));
    writer.write_all(&buf).map_err(|source| Error::Io {
        path: "<writer>".into(),
        source,
    })
}

fn quantize(v: f64) -> u8 {
    // f64::round rounds half away from zero.
    v.clamp(0.0, 255.0).round() as u8
}

fn parse(bytes: &[u8]) -> std::result::Result<ImageGrid, String> {
    let mut pos = 0;
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err("missing P5 magic number".into());
    }
    pos += 2;
    let width = header_field(bytes, &mut pos, "width")?;
    let height = header_field(bytes, &mut pos, "height")?;
    let maxval = header_field(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval} (only 255 is supported)"));
    }
    if width == 0 || height == 0 {
        return Err(format!("degenerate size {width}x{height}"));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err("missing whitespace after maxval".into()),
    }
    let expected = width * height;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(format!(
            "truncated payload: expected {expected} bytes, found {}",
            payload.len()
        ));
    }
    let data = payload[..expected].iter().map(|&b| b as f64).collect();
    ImageGrid::from_vec(height, width, data).map_err(|e| e.to_string())
}

fn header_field(bytes: &[u8], pos: &mut usize, name: &str) -> std::result::Result<usize, String> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(format!("header ended before {name}")),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return Err(format!("expected a decimal {name}"));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("{name} out of range"))
}
