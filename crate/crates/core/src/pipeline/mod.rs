//! Three-phase synthesis: pick the most salient benign region, adapt patch
//! style across the spectral gap, and blend with a Gaussian soft contour
//! before pasting back. Two baseline modes (hard paste, style-transfer-only
//! paste) share the same region selection for side-by-side comparison.

mod batch;
mod manifest;

pub use batch::{run_batch, seam_report, verify_batch, BatchReport, BatchSummary, ModeSeamStats, SampleFailure, SampleStatus, VerifyOutcome};
pub use manifest::{load_manifest, BenignEntry, DonorEntry, Manifest, OutputRecord, SampleProvenance};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::spectral_transfer;
use crate::imaging::{resample_bilinear, GrayImage, RegionSpec, SaliencyMap};
use crate::region::{select_region_constrained, SelectionConstraints};
use crate::seed::rng_from_seed;
use crate::softmask::{blend, centered_mask_params, gaussian_soft_mask, sample_mask_params, SoftMaskParams};

/// Candidate placements whose excluded (background) fraction exceeds this are
/// skipped when a breast mask is supplied.
pub const MAX_BACKGROUND_FRACTION: f64 = 0.10;

/// Which final-stage variant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMode {
    /// Paste the donor patch unmodified: sharp contour, unmatched style.
    HardCutmix,
    /// Paste the spectrally adapted patch: matched style, sharp contour.
    FdaCutmix,
    /// Blend the donor patch with the adapted patch under a Gaussian soft
    /// mask, then paste.
    SoftAdapted,
}

impl SynthesisMode {
    pub const ALL: [SynthesisMode; 3] = [
        SynthesisMode::HardCutmix,
        SynthesisMode::FdaCutmix,
        SynthesisMode::SoftAdapted,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SynthesisMode::HardCutmix => "hard_cutmix",
            SynthesisMode::FdaCutmix => "fda_cutmix",
            SynthesisMode::SoftAdapted => "soft_adapted",
        }
    }
}

/// Which patch receives the other's low-frequency style.
///
/// The two readings differ in what gets pasted: with
/// `BenignToMalignantStyle` the adapted patch carries benign content restyled
/// toward the donor; with `MalignantToBenignStyle` it carries the lesion
/// restyled toward the benign surround, which is the variant that removes the
/// visible seam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptationDirection {
    BenignToMalignantStyle,
    MalignantToBenignStyle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    Sampled,
    Deterministic,
}

/// Label carried by every synthesized sample, independent of mask weights,
/// beta, and mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Malignant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub mode: SynthesisMode,
    pub beta: f64,
    pub adaptation_direction: AdaptationDirection,
    pub mask_mode: MaskMode,
    pub seed: u64,
    pub border_margin: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            mode: SynthesisMode::SoftAdapted,
            beta: 0.05,
            adaptation_direction: AdaptationDirection::BenignToMalignantStyle,
            mask_mode: MaskMode::Sampled,
            seed: 0,
            border_margin: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || !(0.0..0.5).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in [0, 0.5), got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Radiologist-annotated malignant finding on a donor image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonorAnnotation {
    pub donor_id: String,
    pub bbox: RegionSpec,
    /// Lesion kind (mass, calcification, asymmetry, ...). Metadata only.
    pub lesion: String,
}

/// Everything `synthesize` needs for one benign/donor pairing.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisInputs<'a> {
    pub benign_id: &'a str,
    pub benign: &'a GrayImage,
    pub saliency: &'a SaliencyMap,
    /// Optional breast mask; zero pixels mark background air that selected
    /// regions must mostly avoid.
    pub breast_mask: Option<&'a GrayImage>,
    pub donor: &'a GrayImage,
    pub annotation: &'a DonorAnnotation,
}

/// How one sample was produced; enough to regenerate it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub benign_id: String,
    pub donor_id: String,
    pub lesion: String,
    /// Selected placement in the benign image.
    pub region: RegionSpec,
    pub region_score: f64,
    pub mode: SynthesisMode,
    pub adaptation_direction: AdaptationDirection,
    pub beta: f64,
    pub mask_mode: MaskMode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mask_params: Option<SoftMaskParams>,
    pub seed: u64,
    pub border_margin: usize,
}

#[derive(Debug, Clone)]
pub struct SynthesizedSample {
    pub image: GrayImage,
    pub label: Label,
    pub provenance: Provenance,
}

/// Runs the full synthesis for one pairing.
///
/// The destination is the placement of the donor bbox's exact shape with the
/// highest accumulated saliency (lesions are never rescaled). The benign
/// patch there and the donor patch are adapted per the configured direction,
/// combined per the configured mode, and pasted back; pixels outside the
/// selected region are bit-identical to the benign input.
pub fn synthesize(inputs: &SynthesisInputs<'_>, cfg: &SynthesisConfig) -> Result<SynthesizedSample> {
    cfg.validate()?;
    let ann = inputs.annotation;
    if ann.bbox.height < 3 || ann.bbox.width < 3 {
        return Err(Error::InvalidParameter(format!(
            "donor bbox must be at least 3x3 pixels, got {}x{}",
            ann.bbox.height, ann.bbox.width
        )));
    }
    ann.bbox
        .validate_within(inputs.donor.height(), inputs.donor.width())?;

    let benign = inputs.benign;
    let (h, w) = (benign.height(), benign.width());
    let fits = ann.bbox.height + 2 * cfg.border_margin <= h && ann.bbox.width + 2 * cfg.border_margin <= w;
    if !fits {
        return Err(Error::InvalidParameter(format!(
            "donor bbox {}x{} does not fit a {}x{} benign image with margin {}",
            ann.bbox.height, ann.bbox.width, h, w, cfg.border_margin
        )));
    }
    if let Some(mask) = inputs.breast_mask {
        if mask.height() != h || mask.width() != w {
            return Err(Error::DimensionMismatch {
                expected_height: h,
                expected_width: w,
                got_height: mask.height(),
                got_width: mask.width(),
            });
        }
    }

    let saliency_sized;
    let saliency = if inputs.saliency.height() == h && inputs.saliency.width() == w {
        inputs.saliency
    } else {
        saliency_sized = resample_bilinear(inputs.saliency, h, w)?;
        &saliency_sized
    };

    let constraints = SelectionConstraints {
        margin: cfg.border_margin,
        exclusion_mask: inputs.breast_mask,
        max_excluded_fraction: MAX_BACKGROUND_FRACTION,
    };
    let selection = select_region_constrained(saliency, ann.bbox.height, ann.bbox.width, &constraints)?;

    let source_patch = benign.extract_patch(&selection.region)?;
    let donor_patch = inputs.donor.extract_patch(&ann.bbox)?;

    let (patch, mask_params) = match cfg.mode {
        SynthesisMode::HardCutmix => (donor_patch, None),
        SynthesisMode::FdaCutmix => (adapt(cfg, &source_patch, &donor_patch)?, None),
        SynthesisMode::SoftAdapted => {
            let adapted = adapt(cfg, &source_patch, &donor_patch)?;
            let params = match cfg.mask_mode {
                MaskMode::Sampled => {
                    sample_mask_params(ann.bbox.height, ann.bbox.width, &mut rng_from_seed(cfg.seed))?
                }
                MaskMode::Deterministic => centered_mask_params(ann.bbox.height, ann.bbox.width)?,
            };
            let mask = gaussian_soft_mask(&params);
            // The lesion-carrying patch takes the mask weight, the
            // benign-styled patch its complement.
            let (lesion_patch, surround_patch) = match cfg.adaptation_direction {
                AdaptationDirection::BenignToMalignantStyle => (&donor_patch, &adapted),
                AdaptationDirection::MalignantToBenignStyle => (&adapted, &source_patch),
            };
            (blend(surround_patch, lesion_patch, &mask)?, Some(params))
        }
    };

    let image = benign.paste_patch(&patch, selection.region.top, selection.region.left)?;
    Ok(SynthesizedSample {
        image,
        label: Label::Malignant,
        provenance: Provenance {
            benign_id: inputs.benign_id.to_string(),
            donor_id: ann.donor_id.clone(),
            lesion: ann.lesion.clone(),
            region: selection.region,
            region_score: selection.score,
            mode: cfg.mode,
            adaptation_direction: cfg.adaptation_direction,
            beta: cfg.beta,
            mask_mode: cfg.mask_mode,
            mask_params,
            seed: cfg.seed,
            border_margin: cfg.border_margin,
        },
    })
}

/// Adapted patch for the configured direction. The "source" of the spectral
/// transfer keeps its content (phase); the "target" lends its low-frequency
/// style.
fn adapt(cfg: &SynthesisConfig, benign_patch: &GrayImage, donor_patch: &GrayImage) -> Result<GrayImage> {
    match cfg.adaptation_direction {
        AdaptationDirection::BenignToMalignantStyle => spectral_transfer(benign_patch, donor_patch, cfg.beta),
        AdaptationDirection::MalignantToBenignStyle => spectral_transfer(donor_patch, benign_patch, cfg.beta),
    }
}

/// Mean absolute pixel difference across a pasted region's boundary: every
/// boundary pixel of the region against its outward neighbor, all four edges
/// (corner pixels participate once per edge). Quantifies contour hardness;
/// 0 for a constant image.
pub fn seam_gradient_metric(img: &GrayImage, region: &RegionSpec) -> Result<f64> {
    region.validate_within(img.height(), img.width())?;
    let has_collar = region.top >= 1
        && region.left >= 1
        && region.bottom() < img.height()
        && region.right() < img.width();
    if !has_collar {
        return Err(Error::InvalidParameter(
            "seam metric needs a 1-pixel collar around the region".into(),
        ));
    }
    let mut total = 0.0f64;
    let mut pairs = 0usize;
    for j in region.left..region.right() {
        total += (img.get(region.top, j) as f64 - img.get(region.top - 1, j) as f64).abs();
        total += (img.get(region.bottom() - 1, j) as f64 - img.get(region.bottom(), j) as f64).abs();
        pairs += 2;
    }
    for i in region.top..region.bottom() {
        total += (img.get(i, region.left) as f64 - img.get(i, region.left - 1) as f64).abs();
        total += (img.get(i, region.right() - 1) as f64 - img.get(i, region.right()) as f64).abs();
        pairs += 2;
    }
    Ok(total / pairs as f64)
}
