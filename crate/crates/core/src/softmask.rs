//! Gaussian soft-contour masks and convex patch blending.
//!
//! A mask is the outer product of two 1-D Gaussians evaluated at integer
//! pixel centers, peaking at 1 when the center is integral; no
//! renormalization is applied. Blending is the per-pixel convex combination
//! `mask * target + (1 - mask) * source`.

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Floor on each 1-D Gaussian factor. Keeps weights strictly positive when
/// the exponent underflows on extreme patch aspect ratios; the product of two
/// floored factors still sits inside the normal f64 range.
const MIN_FACTOR: f64 = 1e-150;

/// Center and spread of a separable Gaussian mask over an `H_r` x `W_r` patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftMaskParams {
    pub mu_h: f64,
    pub mu_w: f64,
    pub sigma: f64,
    pub height: usize,
    pub width: usize,
}

impl SoftMaskParams {
    pub fn new(mu_h: f64, mu_w: f64, sigma: f64, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "mask dimensions must be at least 1x1, got {height}x{width}"
            )));
        }
        if !(0.0..height as f64).contains(&mu_h) || !(0.0..width as f64).contains(&mu_w) {
            return Err(Error::InvalidParameter(format!(
                "mask center ({mu_h}, {mu_w}) outside the {height}x{width} patch"
            )));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self {
            mu_h,
            mu_w,
            sigma,
            height,
            width,
        })
    }
}

/// Draws mask parameters for a patch: the center uniformly from the central
/// 40-60% band of each axis (a peak near the border would weight the lesion
/// texture off-patch), sigma uniformly from `[0.15, 0.35] * min(H_r, W_r)`.
/// Draw order is `mu_h`, `mu_w`, `sigma`, so a given generator state always
/// yields the same triple.
pub fn sample_mask_params(height: usize, width: usize, rng: &mut impl RngCore) -> Result<SoftMaskParams> {
    check_min_side(height, width)?;
    let (h, w) = (height as f64, width as f64);
    let mu_h = 0.4 * h + 0.2 * h * unit_interval(rng);
    let mu_w = 0.4 * w + 0.2 * w * unit_interval(rng);
    let sigma = (0.15 + 0.2 * unit_interval(rng)) * h.min(w);
    SoftMaskParams::new(mu_h, mu_w, sigma, height, width)
}

/// Non-random fallback: center of the pixel grid, `sigma = 0.25 * min(H_r, W_r)`.
pub fn centered_mask_params(height: usize, width: usize) -> Result<SoftMaskParams> {
    check_min_side(height, width)?;
    SoftMaskParams::new(
        (height - 1) as f64 / 2.0,
        (width - 1) as f64 / 2.0,
        0.25 * height.min(width) as f64,
        height,
        width,
    )
}

fn check_min_side(height: usize, width: usize) -> Result<()> {
    if height < 3 || width < 3 {
        return Err(Error::InvalidParameter(format!(
            "soft masks need at least 3 pixels per side, got {height}x{width}"
        )));
    }
    Ok(())
}

/// 53-bit uniform draw in `[0, 1)` from the generator's raw output; avoids
/// depending on any distribution code whose exact sequence could change.
fn unit_interval(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Blending weights in `(0, 1]`, separable by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask {
    height: usize,
    width: usize,
    weights: Vec<f64>,
}

impl SoftMask {
    /// Builds a mask from explicit weights in `[0, 1]`. Gaussian masks never
    /// reach 0, but hard endpoint masks are valid blend inputs.
    pub fn from_weights(height: usize, width: usize, weights: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || weights.len() != height * width {
            return Err(Error::InvalidParameter(
                "weight count must equal height*width of a nonempty mask".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidParameter("mask weights must lie in [0, 1]".into()));
        }
        Ok(Self {
            height,
            width,
            weights,
        })
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::from_weights(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.width + col]
    }
}

/// Evaluates the separable Gaussian at integer pixel centers:
/// `exp(-(m-mu_h)^2 / 2s^2) * exp(-(n-mu_w)^2 / 2s^2)`, built as an outer
/// product of the two 1-D factor vectors.
pub fn gaussian_soft_mask(params: &SoftMaskParams) -> SoftMask {
    let rows = axis_factors(params.height, params.mu_h, params.sigma);
    let cols = axis_factors(params.width, params.mu_w, params.sigma);
    let mut weights = Vec::with_capacity(params.height * params.width);
    for r in &rows {
        for c in &cols {
            weights.push(r * c);
        }
    }
    SoftMask {
        height: params.height,
        width: params.width,
        weights,
    }
}

fn axis_factors(len: usize, mu: f64, sigma: f64) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let d = i as f64 - mu;
            (-(d * d) / (2.0 * sigma * sigma)).exp().max(MIN_FACTOR)
        })
        .collect()
}

/// Per-pixel convex combination `mask * target + (1 - mask) * source`.
/// Each output pixel is clamped to its `[min(source, target), max(...)]`
/// bracket, so the convexity bound holds exactly after f32 rounding.
pub fn blend(source: &GrayImage, target: &GrayImage, mask: &SoftMask) -> Result<GrayImage> {
    let (h, w) = (source.height(), source.width());
    for (gh, gw) in [(target.height(), target.width()), (mask.height, mask.width)] {
        if (gh, gw) != (h, w) {
            return Err(Error::DimensionMismatch {
                expected_height: h,
                expected_width: w,
                got_height: gh,
                got_width: gw,
            });
        }
    }
    let pixels: Vec<f32> = source
        .pixels()
        .iter()
        .zip(target.pixels())
        .zip(&mask.weights)
        .map(|((&s, &t), &wt)| {
            let mixed = wt * t as f64 + (1.0 - wt) * s as f64;
            let lo = s.min(t) as f64;
            let hi = s.max(t) as f64;
            mixed.clamp(lo, hi) as f32
        })
        .collect();
    GrayImage::from_pixels(h, w, pixels)
}
