//! Deterministic synthetic fixture set shared by the integration suites:
//! six benign/saliency/donor pairings with a patch-mean gap of at least 0.2
//! between the donor finding and the benign destination region.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use mamsynth::imaging::io::{save_image, save_saliency, BitDepth};
use mamsynth::imaging::{GrayImage, RegionSpec, SaliencyMap};
use mamsynth::pipeline::{AdaptationDirection, MaskMode, SynthesisConfig, SynthesisMode};

pub const PAIR_COUNT: usize = 6;

/// Smooth darkish field: gentle diagonal gradient plus a low-frequency wave.
pub fn benign_image(k: usize) -> GrayImage {
    GrayImage::from_fn(96, 96, |i, j| {
        let x = i as f64;
        let y = j as f64;
        let wave = 0.08 * (x * 0.065 + k as f64).sin() * (y * 0.054 - 0.7 * k as f64).sin();
        (0.30 + 0.05 * (x + y) / 192.0 + wave) as f32
    })
    .unwrap()
}

/// Gaussian saliency blob at an interior point that varies per pair.
pub fn benign_saliency(k: usize) -> SaliencyMap {
    let ci = 40.0 + 3.0 * (k % 4) as f64;
    let cj = 38.0 + 4.0 * (k % 3) as f64;
    let values = (0..96 * 96)
        .map(|idx| {
            let i = (idx / 96) as f64;
            let j = (idx % 96) as f64;
            let d2 = (i - ci).powi(2) + (j - cj).powi(2);
            (-d2 / (2.0 * 64.0)).exp() as f32
        })
        .collect();
    SaliencyMap::from_values(96, 96, values).unwrap()
}

/// Brighter textured donor with a Gaussian mass centered in the annotated
/// bbox; the speckle gives it distinctly non-benign high-frequency content.
pub fn donor_fixture(k: usize) -> (GrayImage, RegionSpec) {
    let bbox = RegionSpec::new(18 + (k % 3), 20 + (k % 2), 24 + 2 * (k % 2), 24);
    let ci = bbox.top as f64 + bbox.height as f64 / 2.0;
    let cj = bbox.left as f64 + bbox.width as f64 / 2.0;
    let img = GrayImage::from_fn(64, 64, |i, j| {
        let x = i as f64;
        let y = j as f64;
        let speckle = 0.08 * (x * 1.31 + 0.3 * k as f64).sin() * (y * 1.17 - 0.5 * k as f64).sin();
        let d2 = (x - ci).powi(2) + (y - cj).powi(2);
        let mass = 0.18 * (-d2 / 50.0).exp();
        (0.70 + speckle + mass) as f32
    })
    .unwrap();
    (img, bbox)
}

/// Writes the six pairs plus a JSON Lines manifest under `dir`; returns the
/// manifest path.
pub fn write_fixture_set(dir: &Path) -> PathBuf {
    for sub in ["images", "saliency", "donors"] {
        fs::create_dir_all(dir.join(sub)).unwrap();
    }
    let mut lines = String::new();
    for k in 0..PAIR_COUNT {
        let benign = benign_image(k);
        let saliency = benign_saliency(k);
        let (donor, bbox) = donor_fixture(k);

        save_image(&benign, &dir.join(format!("images/b{k}.png")), BitDepth::Sixteen).unwrap();
        save_saliency(&saliency, &dir.join(format!("saliency/b{k}.pfm"))).unwrap();
        save_image(&donor, &dir.join(format!("donors/d{k}.png")), BitDepth::Sixteen).unwrap();

        lines.push_str(&format!(
            "{{\"id\":\"b{k}\",\"image\":\"images/b{k}.png\",\"saliency\":\"saliency/b{k}.pfm\"}}\n"
        ));
        lines.push_str(&format!(
            "{{\"id\":\"d{k}\",\"image\":\"donors/d{k}.png\",\"bbox\":[{},{},{},{}],\"lesion\":\"mass\"}}\n",
            bbox.top, bbox.left, bbox.height, bbox.width
        ));
    }
    let manifest = dir.join("manifest.jsonl");
    fs::write(&manifest, lines).unwrap();
    manifest
}

/// Configuration the integration suites share. The adaptation direction is
/// the one that restyles the lesion toward the benign surround, which is the
/// variant whose seam ordering the suite asserts.
pub fn fixture_cfg(mode: SynthesisMode) -> SynthesisConfig {
    SynthesisConfig {
        mode,
        beta: 0.05,
        adaptation_direction: AdaptationDirection::MalignantToBenignStyle,
        mask_mode: MaskMode::Sampled,
        seed: 20240613,
        border_margin: 0,
    }
}
