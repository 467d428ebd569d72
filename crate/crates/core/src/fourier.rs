//! Low-frequency spectral style transfer between equal-sized patches.
//!
//! A patch's unnormalized 2-D DFT is split into amplitude and phase. Transfer
//! replaces the amplitude inside a centered low-frequency window with the
//! target patch's amplitude while keeping the source phase, then inverts with
//! `1/(H*W)` normalization. Because both amplitudes and the window are
//! symmetric under the Hermitian index map, the result is real up to rounding;
//! a residue check turns symmetry bugs into errors instead of silently
//! truncating the imaginary part.

use rustfft::num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Relative imaginary-residue budget for the inverse transform.
const IMAG_RESIDUE_LIMIT: f64 = 1e-4;

/// Amplitude and phase of a patch's 2-D DFT, row-major with the DC bin at
/// `(0, 0)`. Amplitudes are nonnegative; the phase of a zero-amplitude bin
/// is defined as 0.
#[derive(Debug, Clone)]
pub struct Spectrum {
    height: usize,
    width: usize,
    amplitude: Vec<f64>,
    phase: Vec<f64>,
}

impl Spectrum {
    pub fn new(height: usize, width: usize, amplitude: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "spectrum dimensions must be at least 1x1, got {height}x{width}"
            )));
        }
        if amplitude.len() != height * width || phase.len() != height * width {
            return Err(Error::InvalidParameter(
                "amplitude/phase length must equal height*width".into(),
            ));
        }
        if amplitude.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidParameter("amplitudes must be finite and nonnegative".into()));
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("phases must be finite".into()));
        }
        Ok(Self {
            height,
            width,
            amplitude,
            phase,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn amplitude_at(&self, m: usize, n: usize) -> f64 {
        self.amplitude[m * self.width + n]
    }

    pub fn phase_at(&self, m: usize, n: usize) -> f64 {
        self.phase[m * self.width + n]
    }
}

/// Indicator over the low-frequency window: in the centered (DC-middle) view
/// the window spans `floor(beta*H)` rows and `floor(beta*W)` columns on each
/// side of DC, so `(2*floor(beta*H)+1) * (2*floor(beta*W)+1)` bins are active.
/// Stored in the same DC-at-(0,0) layout as [`Spectrum`].
#[derive(Debug, Clone)]
pub struct BetaMask {
    height: usize,
    width: usize,
    bins: Vec<bool>,
}

impl BetaMask {
    /// The all-false mask: no amplitude is transferred.
    pub fn disabled(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bins: vec![false; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_active(&self, m: usize, n: usize) -> bool {
        self.bins[m * self.width + n]
    }

    pub fn active_bins(&self) -> usize {
        self.bins.iter().filter(|&&b| b).count()
    }
}

/// Builds the low-frequency window mask for `beta` in `[0, 0.5)`. `beta = 0`
/// degenerates to the DC bin alone.
pub fn make_beta_mask(height: usize, width: usize, beta: f64) -> Result<BetaMask> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidParameter(format!(
            "mask dimensions must be at least 1x1, got {height}x{width}"
        )));
    }
    if !beta.is_finite() || !(0.0..0.5).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in [0, 0.5), got {beta}"
        )));
    }
    let half_h = (beta * height as f64).floor() as usize;
    let half_w = (beta * width as f64).floor() as usize;
    let mut bins = Vec::with_capacity(height * width);
    for m in 0..height {
        // Circular distance to DC; identical for m and (H - m) mod H, which
        // makes the mask symmetric under the Hermitian index map.
        let dist_m = m.min(height - m);
        for n in 0..width {
            let dist_n = n.min(width - n);
            bins.push(dist_m <= half_h && dist_n <= half_w);
        }
    }
    Ok(BetaMask {
        height,
        width,
        bins,
    })
}

/// Amplitude and phase of the unnormalized forward 2-D DFT of a patch.
pub fn forward_spectrum(patch: &GrayImage) -> Spectrum {
    let (h, w) = (patch.height(), patch.width());
    let mut data: Vec<Complex<f64>> = patch
        .pixels()
        .iter()
        .map(|&p| Complex::new(p as f64, 0.0))
        .collect();
    dft2d(h, w, &mut data, FftDirection::Forward);
    let mut amplitude = Vec::with_capacity(h * w);
    let mut phase = Vec::with_capacity(h * w);
    for c in &data {
        let a = c.norm();
        amplitude.push(a);
        phase.push(if a == 0.0 { 0.0 } else { c.arg() });
    }
    Spectrum {
        height: h,
        width: w,
        amplitude,
        phase,
    }
}

/// Inverse DFT with `1/(H*W)` normalization, returned as the raw real field
/// (no clamping). Errors when the imaginary residue exceeds
/// `1e-4 * max(1, max|real|)`, which signals a non-Hermitian spectrum.
pub fn inverse_spectrum_values(spec: &Spectrum) -> Result<Vec<f64>> {
    let (h, w) = (spec.height, spec.width);
    let mut data: Vec<Complex<f64>> = spec
        .amplitude
        .iter()
        .zip(&spec.phase)
        .map(|(&a, &p)| Complex::from_polar(a, p))
        .collect();
    dft2d(h, w, &mut data, FftDirection::Inverse);
    let norm = 1.0 / (h * w) as f64;
    let mut max_imag = 0.0f64;
    let mut max_real = 0.0f64;
    for c in &mut data {
        *c *= norm;
        max_imag = max_imag.max(c.im.abs());
        max_real = max_real.max(c.re.abs());
    }
    let limit = IMAG_RESIDUE_LIMIT * max_real.max(1.0);
    if max_imag > limit {
        return Err(Error::NonHermitianSpectrum {
            residue: max_imag,
            limit,
        });
    }
    Ok(data.into_iter().map(|c| c.re).collect())
}

/// Inverse DFT as an image: real field clamped to the unit interval.
pub fn inverse_spectrum(spec: &Spectrum) -> Result<GrayImage> {
    let values = inverse_spectrum_values(spec)?;
    let pixels: Vec<f32> = values.into_iter().map(|v| v.clamp(0.0, 1.0) as f32).collect();
    GrayImage::from_pixels(spec.height, spec.width, pixels)
}

/// Replaces the source amplitude with the target amplitude on active mask
/// bins; the phase stays the source's everywhere.
pub fn swap_amplitude(source: &Spectrum, target: &Spectrum, mask: &BetaMask) -> Result<Spectrum> {
    check_same_dims(source.height, source.width, target.height, target.width)?;
    check_same_dims(source.height, source.width, mask.height, mask.width)?;
    let amplitude = source
        .amplitude
        .iter()
        .zip(&target.amplitude)
        .zip(&mask.bins)
        .map(|((&s, &t), &active)| if active { t } else { s })
        .collect();
    Ok(Spectrum {
        height: source.height,
        width: source.width,
        amplitude,
        phase: source.phase.clone(),
    })
}

/// Style transfer with an explicit mask: keep the source content (phase and
/// high-frequency amplitude), adopt the target's low-frequency amplitude.
pub fn spectral_transfer_with_mask(
    source: &GrayImage,
    target: &GrayImage,
    mask: &BetaMask,
) -> Result<GrayImage> {
    check_same_dims(source.height(), source.width(), target.height(), target.width())?;
    let swapped = swap_amplitude(&forward_spectrum(source), &forward_spectrum(target), mask)?;
    inverse_spectrum(&swapped)
}

/// Style transfer with the window mask built from `beta`.
pub fn spectral_transfer(source: &GrayImage, target: &GrayImage, beta: f64) -> Result<GrayImage> {
    check_same_dims(source.height(), source.width(), target.height(), target.width())?;
    let mask = make_beta_mask(source.height(), source.width(), beta)?;
    spectral_transfer_with_mask(source, target, &mask)
}

/// Transfer without the final clamp, for callers that need the raw field
/// (pre-clamp mean and distance diagnostics).
pub fn spectral_transfer_values(
    source: &GrayImage,
    target: &GrayImage,
    mask: &BetaMask,
) -> Result<Vec<f64>> {
    check_same_dims(source.height(), source.width(), target.height(), target.width())?;
    let swapped = swap_amplitude(&forward_spectrum(source), &forward_spectrum(target), mask)?;
    inverse_spectrum_values(&swapped)
}

fn check_same_dims(h1: usize, w1: usize, h2: usize, w2: usize) -> Result<()> {
    if h1 != h2 || w1 != w2 {
        return Err(Error::DimensionMismatch {
            expected_height: h1,
            expected_width: w1,
            got_height: h2,
            got_width: w2,
        });
    }
    Ok(())
}

/// In-place 2-D FFT over a row-major `height` x `width` buffer: rows first,
/// then columns via transpose. Planner and scratch are per-call.
fn dft2d(height: usize, width: usize, data: &mut [Complex<f64>], direction: FftDirection) {
    debug_assert_eq!(data.len(), height * width);
    let mut planner = FftPlanner::<f64>::new();

    let row_fft = planner.plan_fft(width, direction);
    let mut scratch = vec![Complex::default(); row_fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(width) {
        row_fft.process_with_scratch(row, &mut scratch);
    }

    let mut transposed = transpose(height, width, data);
    let col_fft = planner.plan_fft(height, direction);
    scratch.resize(col_fft.get_inplace_scratch_len(), Complex::default());
    for row in transposed.chunks_exact_mut(height) {
        col_fft.process_with_scratch(row, &mut scratch);
    }
    let back = transpose(width, height, &transposed);
    data.copy_from_slice(&back);
}

/// `rows` x `cols` row-major input to `cols` x `rows` row-major output.
fn transpose(rows: usize, cols: usize, data: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::default(); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}
