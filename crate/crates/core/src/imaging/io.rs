//! File I/O for images and float maps.
//!
//! Rasters are read and written as 8- or 16-bit single-channel PNG or binary
//! PGM (P5); sample values are scaled by `1/(2^depth - 1)` into the unit
//! interval on load and quantized with round-half-up on save. Saliency maps
//! and other float fields use the grayscale PFM variant: header
//! `Pf\n<W> <H>\n<scale>\n` followed by `W*H` 32-bit floats, rows stored
//! bottom-to-top, a negative scale denoting little-endian. Float maps round
//! trip bit-exactly.
//!
//! Multi-channel inputs are rejected, never converted. All writes go through
//! a temp-file-then-rename step, so a failed run leaves no partial output
//! behind.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::imaging::{GrayImage, SaliencyMap};

/// Output depth for quantized rasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max_value(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

/// Loads an 8- or 16-bit single-channel raster (PNG, PGM) or a float map
/// (PFM) as a unit-interval image. The bit depth is detected from the file.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    match extension(path)?.as_str() {
        "png" => load_png(path),
        "pgm" => load_pgm(path),
        "pfm" => load_pfm_image(path),
        other => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("unknown extension `{other}` (expected png, pgm, or pfm)"),
        }),
    }
}

/// Writes an image at the requested depth. PNG and PGM quantize with
/// round-half-up; a `.pfm` destination stores the raw floats and ignores
/// `depth`.
pub fn save_image(img: &GrayImage, path: &Path, depth: BitDepth) -> Result<()> {
    let bytes = match extension(path)?.as_str() {
        "png" => encode_png(img, depth)?,
        "pgm" => encode_pgm(img, depth),
        "pfm" => encode_pfm(img.height(), img.width(), img.pixels()),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("unknown extension `{other}` (expected png, pgm, or pfm)"),
            })
        }
    };
    write_atomic(path, &bytes)
}

/// Loads a saliency map from a grayscale PFM file. NaN and negative values
/// are rejected: saliency is nonnegative by construction.
pub fn load_saliency(path: &Path) -> Result<SaliencyMap> {
    let (height, width, values) = read_pfm(path)?;
    SaliencyMap::from_values(height, width, values)
        .map_err(|e| annotate_pixels(e, path))
}

/// Writes a saliency map as grayscale PFM; `load_saliency` restores it
/// bit-exactly.
pub fn save_saliency(map: &SaliencyMap, path: &Path) -> Result<()> {
    save_pfm(path, map.height(), map.width(), map.values())
}

/// Writes an arbitrary float field (mask weights, float image) as PFM.
pub fn save_pfm(path: &Path, height: usize, width: usize, values: &[f32]) -> Result<()> {
    assert_eq!(values.len(), height * width, "value count must match dimensions");
    write_atomic(path, &encode_pfm(height, width, values))
}

/// Reads a grayscale PFM into `(height, width, row-major values)` without
/// any domain validation.
pub fn read_pfm(path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pfm(&bytes, path)
}

/// Encodes an image as PNG at the given depth without touching the disk.
/// `run-batch` uses this so a byte-level comparison of outputs is possible
/// without re-reading files.
pub fn encode_png(img: &GrayImage, depth: BitDepth) -> Result<Vec<u8>> {
    let (h, w) = (img.height() as u32, img.width() as u32);
    let mut bytes = Vec::new();
    let dynimg = match depth {
        BitDepth::Eight => {
            let data: Vec<u8> = img.pixels().iter().map(|&p| quantize(p, 255) as u8).collect();
            DynamicImage::ImageLuma8(
                image::ImageBuffer::from_raw(w, h, data).expect("buffer sized from dimensions"),
            )
        }
        BitDepth::Sixteen => {
            let data: Vec<u16> = img.pixels().iter().map(|&p| quantize(p, 65535) as u16).collect();
            DynamicImage::ImageLuma16(
                image::ImageBuffer::from_raw(w, h, data).expect("buffer sized from dimensions"),
            )
        }
    };
    dynimg
        .write_to(&mut Cursor::new(&mut bytes), ImageFormat::Png)
        .map_err(|e| Error::InvalidPixels(format!("png encoding failed: {e}")))?;
    Ok(bytes)
}

fn load_png(path: &Path) -> Result<GrayImage> {
    let decoded = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::Read {
            path: path.to_path_buf(),
            source,
        },
        other => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    })?;
    match decoded {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let pixels = buf.into_raw().iter().map(|&v| scale_sample(v as u32, 255)).collect();
            GrayImage::from_pixels(h, w, pixels).map_err(|e| annotate_pixels(e, path))
        }
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let pixels = buf.into_raw().iter().map(|&v| scale_sample(v as u32, 65535)).collect();
            GrayImage::from_pixels(h, w, pixels).map_err(|e| annotate_pixels(e, path))
        }
        other => Err(Error::MultiChannel {
            path: path.to_path_buf(),
            detail: format!("{:?}", other.color()),
        }),
    }
}

fn load_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "not a binary PGM (missing P5 magic)".into(),
        });
    }
    let mut cursor = 2usize;
    let width = read_pnm_int(&bytes, &mut cursor, path)?;
    let height = read_pnm_int(&bytes, &mut cursor, path)?;
    let maxval = read_pnm_int(&bytes, &mut cursor, path)?;
    // Exactly one whitespace byte separates the header from the samples.
    cursor += 1;
    let (h, w) = (height as usize, width as usize);
    let data = &bytes[cursor.min(bytes.len())..];
    let pixels = match maxval {
        255 => {
            if data.len() < h * w {
                return Err(truncated(path));
            }
            data[..h * w].iter().map(|&b| scale_sample(b as u32, 255)).collect()
        }
        65535 => {
            if data.len() < 2 * h * w {
                return Err(truncated(path));
            }
            data[..2 * h * w]
                .chunks_exact(2)
                .map(|c| scale_sample(u16::from_be_bytes([c[0], c[1]]) as u32, 65535))
                .collect()
        }
        other => {
            return Err(Error::UnsupportedDepth {
                path: path.to_path_buf(),
                detail: format!("maxval {other} (expected 255 or 65535)"),
            })
        }
    };
    GrayImage::from_pixels(h, w, pixels).map_err(|e| annotate_pixels(e, path))
}

fn load_pfm_image(path: &Path) -> Result<GrayImage> {
    let (height, width, values) = read_pfm(path)?;
    GrayImage::from_pixels(height, width, values).map_err(|e| annotate_pixels(e, path))
}

fn encode_pgm(img: &GrayImage, depth: BitDepth) -> Vec<u8> {
    let maxval = depth.max_value();
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    match depth {
        BitDepth::Eight => {
            out.extend(img.pixels().iter().map(|&p| quantize(p, 255) as u8));
        }
        BitDepth::Sixteen => {
            for &p in img.pixels() {
                out.extend_from_slice(&(quantize(p, 65535) as u16).to_be_bytes());
            }
        }
    }
    out
}

fn encode_pfm(height: usize, width: usize, values: &[f32]) -> Vec<u8> {
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    // PFM stores rows bottom-to-top.
    for row in (0..height).rev() {
        for col in 0..width {
            out.extend_from_slice(&values[row * width + col].to_le_bytes());
        }
    }
    out
}

fn parse_pfm(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    if bytes.len() >= 2 && &bytes[..2] == b"PF" {
        return Err(Error::MultiChannel {
            path: path.to_path_buf(),
            detail: "color PFM (`PF`); only grayscale `Pf` is supported".into(),
        });
    }
    if bytes.len() < 2 || &bytes[..2] != b"Pf" {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "not a grayscale PFM (missing Pf magic)".into(),
        });
    }
    let mut cursor = 2usize;
    let width = read_pnm_int(bytes, &mut cursor, path)? as usize;
    let height = read_pnm_int(bytes, &mut cursor, path)? as usize;
    let scale = read_pnm_token(bytes, &mut cursor, path)?
        .parse::<f32>()
        .map_err(|_| Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "malformed PFM scale field".into(),
        })?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("invalid PFM scale {scale}"),
        });
    }
    let little_endian = scale < 0.0;
    cursor += 1; // single whitespace byte after the scale
    let data = &bytes[cursor.min(bytes.len())..];
    if width == 0 || height == 0 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("degenerate dimensions {width}x{height}"),
        });
    }
    if data.len() < 4 * width * height {
        return Err(truncated(path));
    }
    let mut values = vec![0.0f32; width * height];
    for file_row in 0..height {
        let img_row = height - 1 - file_row; // bottom-to-top storage
        for col in 0..width {
            let off = 4 * (file_row * width + col);
            let raw = [data[off], data[off + 1], data[off + 2], data[off + 3]];
            let v = if little_endian {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            values[img_row * width + col] = v;
        }
    }
    Ok((height, width, values))
}

/// Reads the next whitespace-delimited header token, skipping `#` comments.
fn read_pnm_token<'a>(bytes: &'a [u8], cursor: &mut usize, path: &Path) -> Result<&'a str> {
    let mut i = *cursor;
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        break;
    }
    let start = i;
    while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
        i += 1;
    }
    if start == i {
        return Err(truncated(path));
    }
    *cursor = i;
    std::str::from_utf8(&bytes[start..i]).map_err(|_| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        detail: "non-ASCII header token".into(),
    })
}

fn read_pnm_int(bytes: &[u8], cursor: &mut usize, path: &Path) -> Result<u32> {
    let token = read_pnm_token(bytes, cursor, path)?;
    token.parse::<u32>().map_err(|_| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        detail: format!("malformed header integer `{token}`"),
    })
}

fn truncated(path: &Path) -> Error {
    Error::UnsupportedFormat {
        path: path.to_path_buf(),
        detail: "file truncated".into(),
    }
}

fn extension(path: &Path) -> Result<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "missing file extension".into(),
        })
}

/// Round-half-up quantization of a unit-interval value to `0..=max`.
fn quantize(value: f32, max: u32) -> u32 {
    ((value as f64 * max as f64 + 0.5).floor() as u32).min(max)
}

fn scale_sample(value: u32, max: u32) -> f32 {
    (value as f64 / max as f64) as f32
}

fn annotate_pixels(err: Error, path: &Path) -> Error {
    match err {
        Error::InvalidPixels(detail) => Error::InvalidPixels(format!("{}: {detail}", path.display())),
        other => other,
    }
}

/// Writes to `<name>.part` in the destination directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().ok_or_else(|| Error::Write {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "path has no file name"),
    })?;
    let tmp = path.with_file_name(format!("{}.part", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|source| Error::Write {
        path: tmp.clone(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}
