//! Core raster model: unit-interval grayscale images, saliency maps, and
//! rectangular region addressing, plus bilinear resampling and patch
//! extract/paste. File I/O lives in [`io`].
//!
//! All pixel values are stored as `f32` in `[0, 1]` regardless of the source
//! bit depth, so 8- and 16-bit inputs interoperate and downstream arithmetic
//! is defined over real-valued images. Values are immutable once constructed;
//! every operation returns a new value.

pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// H x W grayscale raster with row-major `f32` intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f32>,
}

impl GrayImage {
    /// All-zero image.
    pub fn new(height: usize, width: usize) -> Result<Self> {
        check_dims(height, width)?;
        Ok(Self {
            height,
            width,
            pixels: vec![0.0; height * width],
        })
    }

    /// Builds an image from row-major pixels, rejecting non-finite values and
    /// values outside `[0, 1]`.
    pub fn from_pixels(height: usize, width: usize, pixels: Vec<f32>) -> Result<Self> {
        check_dims(height, width)?;
        if pixels.len() != height * width {
            return Err(Error::InvalidPixels(format!(
                "expected {} pixels for a {}x{} image, got {}",
                height * width,
                height,
                width,
                pixels.len()
            )));
        }
        for (i, &p) in pixels.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidPixels(format!(
                    "pixel {i} is {p}, outside the unit interval"
                )));
            }
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        check_dims(height, width)?;
        let mut pixels = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                pixels.push(f(i, j));
            }
        }
        Self::from_pixels(height, width, pixels)
    }

    pub fn constant(height: usize, width: usize, value: f32) -> Result<Self> {
        Self::from_pixels(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    /// Pixel at `(row, col)`. Panics when out of bounds.
    pub fn get(&self, row: usize, col: usize) -> f32 {
        assert!(row < self.height && col < self.width, "pixel index out of bounds");
        self.pixels[row * self.width + col]
    }

    pub fn mean(&self) -> f64 {
        if self.pixels.is_empty() {
            return 0.0;
        }
        self.pixels.iter().map(|&p| p as f64).sum::<f64>() / self.pixels.len() as f64
    }

    /// Copies the window addressed by `region` into a new image.
    pub fn extract_patch(&self, region: &RegionSpec) -> Result<GrayImage> {
        region.validate_within(self.height, self.width)?;
        let mut pixels = Vec::with_capacity(region.height * region.width);
        for i in 0..region.height {
            let start = (region.top + i) * self.width + region.left;
            pixels.extend_from_slice(&self.pixels[start..start + region.width]);
        }
        Ok(GrayImage {
            height: region.height,
            width: region.width,
            pixels,
        })
    }

    /// Returns a copy of `self` with `patch` written at `(top, left)`;
    /// pixels outside the window are untouched.
    pub fn paste_patch(&self, patch: &GrayImage, top: usize, left: usize) -> Result<GrayImage> {
        let region = RegionSpec {
            top,
            left,
            height: patch.height,
            width: patch.width,
        };
        region.validate_within(self.height, self.width)?;
        let mut pixels = self.pixels.clone();
        for i in 0..patch.height {
            let dst = (top + i) * self.width + left;
            let src = i * patch.width;
            pixels[dst..dst + patch.width].copy_from_slice(&patch.pixels[src..src + patch.width]);
        }
        Ok(GrayImage {
            height: self.height,
            width: self.width,
            pixels,
        })
    }
}

/// H x W nonnegative float map, the carrier for class-discriminative
/// saliency ingested from files or produced by the pseudo-saliency surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl SaliencyMap {
    /// Builds a map from row-major values, rejecting NaN/infinite and
    /// negative entries.
    pub fn from_values(height: usize, width: usize, values: Vec<f32>) -> Result<Self> {
        check_dims(height, width)?;
        if values.len() != height * width {
            return Err(Error::InvalidPixels(format!(
                "expected {} values for a {}x{} map, got {}",
                height * width,
                height,
                width,
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidPixels(format!("saliency value {i} is not finite")));
            }
            if v < 0.0 {
                return Err(Error::InvalidPixels(format!(
                    "saliency value {i} is negative ({v}); saliency maps are nonnegative"
                )));
            }
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn constant(height: usize, width: usize, value: f32) -> Result<Self> {
        Self::from_values(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        assert!(row < self.height && col < self.width, "saliency index out of bounds");
        self.values[row * self.width + col]
    }

    /// Scales the map so its maximum is 1; an identically-zero map stays zero.
    pub fn normalized(&self) -> SaliencyMap {
        let max = self.values.iter().cloned().fold(0.0f32, f32::max);
        if max <= 0.0 {
            return self.clone();
        }
        let values = self.values.iter().map(|&v| ((v as f64) / (max as f64)) as f32).collect();
        SaliencyMap {
            height: self.height,
            width: self.width,
            values,
        }
    }
}

/// Rectangular window: top-left corner plus extent, in pixel indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl RegionSpec {
    pub fn new(top: usize, left: usize, height: usize, width: usize) -> Self {
        Self {
            top,
            left,
            height,
            width,
        }
    }

    /// One past the last row.
    pub fn bottom(&self) -> usize {
        self.top + self.height
    }

    /// One past the last column.
    pub fn right(&self) -> usize {
        self.left + self.width
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }

    /// Checks that the window is nonempty and fully inside an
    /// `image_height` x `image_width` raster.
    pub fn validate_within(&self, image_height: usize, image_width: usize) -> Result<()> {
        let fits = self.height >= 1
            && self.width >= 1
            && self
                .top
                .checked_add(self.height)
                .is_some_and(|b| b <= image_height)
            && self
                .left
                .checked_add(self.width)
                .is_some_and(|r| r <= image_width);
        if fits {
            Ok(())
        } else {
            Err(Error::RegionOutOfBounds {
                region: *self,
                height: image_height,
                width: image_width,
            })
        }
    }
}

/// Bilinearly resamples a saliency map to `new_height` x `new_width`.
///
/// Output coordinates map onto the input with endpoints aligned, so
/// resampling to the identical size is bit-identical and a constant map
/// stays constant. Results are clamped to the local neighborhood, which
/// keeps every output inside the input's `[min, max]`.
pub fn resample_bilinear(map: &SaliencyMap, new_height: usize, new_width: usize) -> Result<SaliencyMap> {
    check_dims(new_height, new_width)?;
    if new_height == map.height && new_width == map.width {
        return Ok(map.clone());
    }
    let (h, w) = (map.height, map.width);
    let mut values = Vec::with_capacity(new_height * new_width);
    for r in 0..new_height {
        let src_r = axis_coord(r, h, new_height);
        let r0 = src_r.floor() as usize;
        let r1 = (r0 + 1).min(h - 1);
        let fr = src_r - r0 as f64;
        for c in 0..new_width {
            let src_c = axis_coord(c, w, new_width);
            let c0 = src_c.floor() as usize;
            let c1 = (c0 + 1).min(w - 1);
            let fc = src_c - c0 as f64;

            let a = map.values[r0 * w + c0] as f64;
            let b = map.values[r0 * w + c1] as f64;
            let d = map.values[r1 * w + c0] as f64;
            let e = map.values[r1 * w + c1] as f64;
            let top = (1.0 - fc) * a + fc * b;
            let bottom = (1.0 - fc) * d + fc * e;
            let v = (1.0 - fr) * top + fr * bottom;

            let lo = a.min(b).min(d).min(e);
            let hi = a.max(b).max(d).max(e);
            values.push(v.clamp(lo, hi) as f32);
        }
    }
    Ok(SaliencyMap {
        height: new_height,
        width: new_width,
        values,
    })
}

/// Source coordinate for output index `out` when mapping `out_len` samples
/// onto `in_len` with aligned endpoints.
fn axis_coord(out: usize, in_len: usize, out_len: usize) -> f64 {
    if out_len == 1 {
        (in_len - 1) as f64 / 2.0
    } else {
        out as f64 * (in_len - 1) as f64 / (out_len - 1) as f64
    }
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidParameter(format!(
            "dimensions must be at least 1x1, got {height}x{width}"
        )));
    }
    Ok(())
}
