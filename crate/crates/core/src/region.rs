//! Saliency-driven region selection.
//!
//! The accumulated saliency of a candidate window is the double sum of map
//! values over the window. `select_region` scans every placement using a
//! summed-area table, giving each window sum in four lookups;
//! `select_region_bruteforce` is the literal nested-loop transcription that
//! re-sums each candidate and serves as the oracle. Both keep the first
//! row-major maximum: the update condition is a strict `best < candidate`.

use crate::error::{Error, Result};
use crate::imaging::{GrayImage, RegionSpec, SaliencyMap};

/// Prefix-sum table over a saliency map, one-padded with a zero border row
/// and column. Entry `(h, w)` holds the sum over all rows `< h`, cols `< w`.
///
/// Sums accumulate in `f64` even though map values are `f32`: the four-corner
/// subtraction is cancellation-prone on large maps.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    height: usize,
    width: usize,
    sums: Vec<f64>,
}

impl IntegralImage {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Raw table entry; `row` and `col` range over `0..=height`/`0..=width`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.sums[row * (self.width + 1) + col]
    }

    /// Window sum in four lookups.
    pub fn region_sum(&self, region: &RegionSpec) -> Result<f64> {
        region.validate_within(self.height, self.width)?;
        let stride = self.width + 1;
        let (t, l) = (region.top, region.left);
        let (b, r) = (region.bottom(), region.right());
        Ok(self.sums[b * stride + r] - self.sums[t * stride + r] - self.sums[b * stride + l]
            + self.sums[t * stride + l])
    }
}

/// Builds the summed-area table for a map.
pub fn build_integral(map: &SaliencyMap) -> IntegralImage {
    let (h, w) = (map.height(), map.width());
    let stride = w + 1;
    let mut sums = vec![0.0f64; (h + 1) * stride];
    for i in 0..h {
        let mut row_acc = 0.0f64;
        for j in 0..w {
            row_acc += map.values()[i * w + j] as f64;
            sums[(i + 1) * stride + (j + 1)] = sums[i * stride + (j + 1)] + row_acc;
        }
    }
    IntegralImage {
        height: h,
        width: w,
        sums,
    }
}

/// Accumulated saliency of `region`, via the integral-image fast path.
pub fn region_intensity(integral: &IntegralImage, region: &RegionSpec) -> Result<f64> {
    integral.region_sum(region)
}

/// Accumulated saliency of `region` by direct double summation. Oracle for
/// the fast path; also what the brute-force selector evaluates per candidate.
pub fn region_intensity_naive(map: &SaliencyMap, region: &RegionSpec) -> Result<f64> {
    region.validate_within(map.height(), map.width())?;
    let mut sum = 0.0f64;
    for m in region.top..region.bottom() {
        for n in region.left..region.right() {
            sum += map.values()[m * map.width() + n] as f64;
        }
    }
    Ok(sum)
}

/// Argmax placement and its accumulated saliency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionResult {
    pub region: RegionSpec,
    pub score: f64,
}

/// Optional restrictions on candidate placements.
#[derive(Debug, Clone, Copy)]
pub struct SelectionConstraints<'a> {
    /// Candidates keep at least this many pixels from every image border.
    pub margin: usize,
    /// Pixels equal to zero in this image count as excluded area
    /// (e.g. background air outside a breast mask).
    pub exclusion_mask: Option<&'a GrayImage>,
    /// Candidates whose excluded-area fraction exceeds this are skipped.
    pub max_excluded_fraction: f64,
}

impl Default for SelectionConstraints<'_> {
    fn default() -> Self {
        Self {
            margin: 0,
            exclusion_mask: None,
            max_excluded_fraction: 0.10,
        }
    }
}

/// Finds the placement with maximal accumulated saliency using a summed-area
/// table: O(H·W) after O(H·W) table construction. Row-major scan; ties keep
/// the earliest placement.
pub fn select_region(map: &SaliencyMap, region_height: usize, region_width: usize) -> Result<SelectionResult> {
    select_region_constrained(map, region_height, region_width, &SelectionConstraints::default())
}

/// `select_region` with a border margin and an optional exclusion mask.
pub fn select_region_constrained(
    map: &SaliencyMap,
    region_height: usize,
    region_width: usize,
    constraints: &SelectionConstraints<'_>,
) -> Result<SelectionResult> {
    let (h, w) = (map.height(), map.width());
    let margin = constraints.margin;
    check_region_shape(region_height, region_width, h, w, margin)?;

    let excluded = match constraints.exclusion_mask {
        Some(mask) => {
            if mask.height() != h || mask.width() != w {
                return Err(Error::DimensionMismatch {
                    expected_height: h,
                    expected_width: w,
                    got_height: mask.height(),
                    got_width: mask.width(),
                });
            }
            let indicator = SaliencyMap::from_values(
                h,
                w,
                mask.pixels().iter().map(|&p| if p == 0.0 { 1.0 } else { 0.0 }).collect(),
            )
            .expect("indicator values are 0 or 1");
            Some(build_integral(&indicator))
        }
        None => None,
    };

    let integral = build_integral(map);
    let area = (region_height * region_width) as f64;
    let mut best: Option<(f64, usize, usize)> = None;
    for i in margin..=h - region_height - margin {
        for j in margin..=w - region_width - margin {
            let candidate = RegionSpec::new(i, j, region_height, region_width);
            if let Some(ref excl) = excluded {
                let outside = excl.region_sum(&candidate).expect("candidate in bounds");
                if outside / area > constraints.max_excluded_fraction {
                    continue;
                }
            }
            let score = integral.region_sum(&candidate).expect("candidate in bounds");
            match best {
                Some((best_score, _, _)) if best_score >= score => {}
                _ => best = Some((score, i, j)),
            }
        }
    }
    match best {
        Some((score, i, j)) => Ok(SelectionResult {
            region: RegionSpec::new(i, j, region_height, region_width),
            score,
        }),
        None => Err(Error::NoValidRegion),
    }
}

/// Literal transcription of the nested-loop search: every candidate is
/// re-summed naively and the running best is updated on strict `<`.
/// O(H·W·H_r·W_r); kept as the oracle for `select_region`.
pub fn select_region_bruteforce(
    map: &SaliencyMap,
    region_height: usize,
    region_width: usize,
) -> Result<SelectionResult> {
    let (h, w) = (map.height(), map.width());
    check_region_shape(region_height, region_width, h, w, 0)?;
    let mut best_score = f64::NEG_INFINITY;
    let (mut best_i, mut best_j) = (0usize, 0usize);
    for i in 0..=h - region_height {
        for j in 0..=w - region_width {
            let candidate = RegionSpec::new(i, j, region_height, region_width);
            let score = region_intensity_naive(map, &candidate).expect("candidate in bounds");
            if best_score < score {
                best_score = score;
                best_i = i;
                best_j = j;
            }
        }
    }
    Ok(SelectionResult {
        region: RegionSpec::new(best_i, best_j, region_height, region_width),
        score: best_score,
    })
}

fn check_region_shape(
    region_height: usize,
    region_width: usize,
    map_height: usize,
    map_width: usize,
    margin: usize,
) -> Result<()> {
    if region_height == 0 || region_width == 0 {
        return Err(Error::InvalidParameter(format!(
            "region shape must be at least 1x1, got {region_height}x{region_width}"
        )));
    }
    let fits = region_height + 2 * margin <= map_height && region_width + 2 * margin <= map_width;
    if !fits {
        return Err(Error::RegionOutOfBounds {
            region: RegionSpec::new(margin, margin, region_height, region_width),
            height: map_height,
            width: map_width,
        });
    }
    Ok(())
}

/// Deterministic stand-in for a CNN saliency map: Gaussian-blurred image
/// intensity, min-max normalized to `[0, 1]`. A constant image yields the
/// all-zero map. `blur_radius` is the kernel half-width; the Gaussian sigma
/// is half the radius and borders are replicated.
pub fn pseudo_saliency(img: &GrayImage, blur_radius: usize) -> SaliencyMap {
    let (h, w) = (img.height(), img.width());
    let src: Vec<f64> = img.pixels().iter().map(|&p| p as f64).collect();
    let blurred = if blur_radius == 0 {
        src
    } else {
        let kernel = gaussian_kernel(blur_radius);
        let rows = convolve_rows(&src, h, w, &kernel, blur_radius);
        convolve_cols(&rows, h, w, &kernel, blur_radius)
    };
    let lo = blurred.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = blurred.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let values: Vec<f32> = if range <= 0.0 {
        vec![0.0; h * w]
    } else {
        blurred.iter().map(|&v| ((v - lo) / range) as f32).collect()
    };
    SaliencyMap::from_values(h, w, values).expect("normalized values are finite and nonnegative")
}

fn gaussian_kernel(radius: usize) -> Vec<f64> {
    let sigma = radius as f64 / 2.0;
    let mut kernel: Vec<f64> = (-(radius as i64)..=radius as i64)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }
    kernel
}

fn convolve_rows(src: &[f64], h: usize, w: usize, kernel: &[f64], radius: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; h * w];
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let jj = (j as i64 + k as i64 - radius as i64).clamp(0, w as i64 - 1) as usize;
                acc += kv * src[i * w + jj];
            }
            out[i * w + j] = acc;
        }
    }
    out
}

fn convolve_cols(src: &[f64], h: usize, w: usize, kernel: &[f64], radius: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; h * w];
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let ii = (i as i64 + k as i64 - radius as i64).clamp(0, h as i64 - 1) as usize;
                acc += kv * src[ii * w + j];
            }
            out[i * w + j] = acc;
        }
    }
    out
}
