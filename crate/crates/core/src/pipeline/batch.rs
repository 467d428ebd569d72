//! Batch synthesis over a dataset manifest, plus verification and the
//! cross-mode seam report.
//!
//! Benign entries pair with donors round-robin in manifest order. Every
//! sample gets its own seed derived from the run seed and its index, so the
//! outputs do not depend on scheduling; samples run in parallel and the
//! output manifest is written in manifest order. Nothing in the outputs
//! carries a timestamp: two runs with the same inputs and seed are
//! byte-identical.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::io::{encode_png, load_image, load_saliency, BitDepth};
use crate::imaging::{GrayImage, RegionSpec, SaliencyMap};
use crate::pipeline::manifest::{load_manifest, load_output_manifest, BenignEntry, DonorEntry, OutputRecord, SampleProvenance};
use crate::pipeline::{seam_gradient_metric, synthesize, DonorAnnotation, SynthesisConfig, SynthesisInputs, SynthesisMode};
use crate::seed::derive_seed;

/// Per-sample progress line for callers that log as the batch runs.
#[derive(Debug, Clone)]
pub struct SampleStatus {
    pub index: usize,
    pub id: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleFailure {
    pub index: usize,
    pub benign_id: String,
    pub donor_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchSummary {
    pub count: usize,
    pub failed: usize,
    pub mode: SynthesisMode,
    pub beta: f64,
    pub seed: u64,
    /// Mean seam-gradient metric over samples whose region leaves a 1-pixel
    /// collar; absent when no sample qualifies.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_seam_gradient: Option<f64>,
    pub failures: Vec<SampleFailure>,
}

#[derive(Debug, Clone)]
pub struct BatchReport {
    pub records: Vec<OutputRecord>,
    pub summary: BatchSummary,
}

/// Synthesizes one sample per benign entry (donors assigned round-robin) and
/// writes `images/<id>.png` (16-bit), `manifest.jsonl`, and `summary.json`
/// under `out_dir`. Per-entry failures are recorded in the summary and
/// skipped; a batch where every entry fails is an error.
pub fn run_batch(
    manifest_path: &Path,
    cfg: &SynthesisConfig,
    out_dir: &Path,
    on_sample: impl Fn(&SampleStatus) + Sync,
) -> Result<BatchReport> {
    cfg.validate()?;
    let manifest = load_manifest(manifest_path)?;
    if manifest.benign.is_empty() || manifest.donors.is_empty() {
        return Err(Error::EmptyManifest);
    }
    let images_dir = out_dir.join("images");
    fs::create_dir_all(&images_dir).map_err(|source| Error::Write {
        path: images_dir.clone(),
        source,
    })?;

    let pairs: Vec<(usize, &BenignEntry, &DonorEntry)> = manifest
        .benign
        .iter()
        .enumerate()
        .map(|(k, b)| (k, b, &manifest.donors[k % manifest.donors.len()]))
        .collect();

    let results: Vec<std::result::Result<(OutputRecord, Option<f64>), SampleFailure>> = pairs
        .par_iter()
        .map(|&(index, benign, donor)| {
            let outcome = synthesize_entry(index, benign, donor, cfg, out_dir);
            let status = match &outcome {
                Ok((record, _)) => SampleStatus {
                    index,
                    id: record.id.clone(),
                    ok: true,
                    detail: record.image.clone(),
                },
                Err(failure) => SampleStatus {
                    index,
                    id: format!("{}-{}", failure.benign_id, failure.donor_id),
                    ok: false,
                    detail: failure.error.clone(),
                },
            };
            on_sample(&status);
            outcome
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut seams = Vec::new();
    for outcome in results {
        match outcome {
            Ok((record, seam)) => {
                records.push(record);
                if let Some(s) = seam {
                    seams.push(s);
                }
            }
            Err(failure) => failures.push(failure),
        }
    }
    if records.is_empty() {
        return Err(Error::BatchFailed {
            count: failures.len(),
            first: failures.first().map(|f| f.error.clone()).unwrap_or_default(),
        });
    }

    let summary = BatchSummary {
        count: records.len(),
        failed: failures.len(),
        mode: cfg.mode,
        beta: cfg.beta,
        seed: cfg.seed,
        mean_seam_gradient: mean(&seams),
        failures,
    };

    let mut manifest_bytes = Vec::new();
    for record in &records {
        serde_json::to_writer(&mut manifest_bytes, record).expect("record serializes");
        manifest_bytes.push(b'\n');
    }
    write_atomic(&out_dir.join("manifest.jsonl"), &manifest_bytes)?;
    let mut summary_bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    summary_bytes.push(b'\n');
    write_atomic(&out_dir.join("summary.json"), &summary_bytes)?;

    Ok(BatchReport { records, summary })
}

fn synthesize_entry(
    index: usize,
    benign: &BenignEntry,
    donor: &DonorEntry,
    cfg: &SynthesisConfig,
    out_dir: &Path,
) -> std::result::Result<(OutputRecord, Option<f64>), SampleFailure> {
    let fail = |error: String| SampleFailure {
        index,
        benign_id: benign.id.clone(),
        donor_id: donor.id.clone(),
        error,
    };

    let sample_cfg = SynthesisConfig {
        seed: derive_seed(cfg.seed, index as u64),
        ..*cfg
    };
    let (sample, image_bytes) =
        regenerate_sample(&benign.image, &benign.saliency, benign.breast_mask.as_deref(), &donor.image, donor.bbox, &benign.id, &donor.id, &donor.lesion, &sample_cfg)
            .map_err(|e| fail(e.to_string()))?;

    let id = format!("{index:04}-{}-{}", benign.id, donor.id);
    let rel_image = format!("images/{id}.png");
    write_atomic(&out_dir.join(&rel_image), &image_bytes).map_err(|e| fail(e.to_string()))?;

    let seam = seam_gradient_metric(&sample.image, &sample.provenance.region).ok();
    let record = OutputRecord {
        id,
        image: rel_image,
        label: sample.label,
        provenance: SampleProvenance {
            synthesis: sample.provenance,
            benign_image: benign.image.clone(),
            saliency: benign.saliency.clone(),
            breast_mask: benign.breast_mask.clone(),
            donor_image: donor.image.clone(),
            donor_bbox: donor.bbox,
        },
    };
    Ok((record, seam))
}

/// Loads inputs, synthesizes, and encodes: the shared path between batch
/// generation and verification.
#[allow(clippy::too_many_arguments)]
fn regenerate_sample(
    benign_image: &str,
    saliency: &str,
    breast_mask: Option<&str>,
    donor_image: &str,
    donor_bbox: [usize; 4],
    benign_id: &str,
    donor_id: &str,
    lesion: &str,
    cfg: &SynthesisConfig,
) -> Result<(crate::pipeline::SynthesizedSample, Vec<u8>)> {
    let benign = load_image(Path::new(benign_image))?;
    let saliency: SaliencyMap = load_saliency(Path::new(saliency))?;
    let mask: Option<GrayImage> = match breast_mask {
        Some(p) => Some(load_image(Path::new(p))?),
        None => None,
    };
    let donor = load_image(Path::new(donor_image))?;
    let annotation = DonorAnnotation {
        donor_id: donor_id.to_string(),
        bbox: RegionSpec::new(donor_bbox[0], donor_bbox[1], donor_bbox[2], donor_bbox[3]),
        lesion: lesion.to_string(),
    };
    let inputs = SynthesisInputs {
        benign_id,
        benign: &benign,
        saliency: &saliency,
        breast_mask: mask.as_ref(),
        donor: &donor,
        annotation: &annotation,
    };
    let sample = synthesize(&inputs, cfg)?;
    let bytes = encode_png(&sample.image, BitDepth::Sixteen)?;
    Ok((sample, bytes))
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOutcome {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

/// Re-derives every sample of a batch directory from its provenance record
/// and byte-compares the regenerated image against the stored file.
pub fn verify_batch(out_dir: &Path) -> Result<VerifyOutcome> {
    let records = load_output_manifest(&out_dir.join("manifest.jsonl"))?;
    let mismatches = Mutex::new(Vec::new());
    records.par_iter().for_each(|record| {
        if let Some(problem) = verify_record(out_dir, record) {
            mismatches.lock().unwrap().push(format!("{}: {}", record.id, problem));
        }
    });
    let mut mismatches = mismatches.into_inner().unwrap();
    mismatches.sort();
    Ok(VerifyOutcome {
        checked: records.len(),
        mismatches,
    })
}

fn verify_record(out_dir: &Path, record: &OutputRecord) -> Option<String> {
    let p = &record.provenance;
    let cfg = SynthesisConfig {
        mode: p.synthesis.mode,
        beta: p.synthesis.beta,
        adaptation_direction: p.synthesis.adaptation_direction,
        mask_mode: p.synthesis.mask_mode,
        seed: p.synthesis.seed,
        border_margin: p.synthesis.border_margin,
    };
    let regenerated = regenerate_sample(
        &p.benign_image,
        &p.saliency,
        p.breast_mask.as_deref(),
        &p.donor_image,
        p.donor_bbox,
        &p.synthesis.benign_id,
        &p.synthesis.donor_id,
        &p.synthesis.lesion,
        &cfg,
    );
    let (sample, bytes) = match regenerated {
        Ok(v) => v,
        Err(e) => return Some(format!("regeneration failed: {e}")),
    };
    if sample.provenance.region != p.synthesis.region {
        return Some(format!(
            "selected region changed: recorded {:?}, regenerated {:?}",
            p.synthesis.region, sample.provenance.region
        ));
    }
    let stored = match fs::read(out_dir.join(&record.image)) {
        Ok(b) => b,
        Err(e) => return Some(format!("cannot read stored image: {e}")),
    };
    if stored != bytes {
        return Some("regenerated bytes differ from stored image".into());
    }
    None
}

/// Mean seam-gradient metric per mode over the manifest's pairings, computed
/// in memory with the same per-sample seeds a batch run would use.
#[derive(Debug, Clone, Serialize)]
pub struct ModeSeamStats {
    pub mode: SynthesisMode,
    pub samples: usize,
    pub mean_seam_gradient: Option<f64>,
}

pub fn seam_report(manifest_path: &Path, base_cfg: &SynthesisConfig) -> Result<Vec<ModeSeamStats>> {
    base_cfg.validate()?;
    let manifest = load_manifest(manifest_path)?;
    if manifest.benign.is_empty() || manifest.donors.is_empty() {
        return Err(Error::EmptyManifest);
    }
    let mut stats = Vec::new();
    for mode in SynthesisMode::ALL {
        let mut seams = Vec::new();
        for (index, benign) in manifest.benign.iter().enumerate() {
            let donor = &manifest.donors[index % manifest.donors.len()];
            let cfg = SynthesisConfig {
                mode,
                seed: derive_seed(base_cfg.seed, index as u64),
                ..*base_cfg
            };
            let (sample, _) = regenerate_sample(
                &benign.image,
                &benign.saliency,
                benign.breast_mask.as_deref(),
                &donor.image,
                donor.bbox,
                &benign.id,
                &donor.id,
                &donor.lesion,
                &cfg,
            )?;
            if let Ok(seam) = seam_gradient_metric(&sample.image, &sample.provenance.region) {
                seams.push(seam);
            }
        }
        stats.push(ModeSeamStats {
            mode,
            samples: seams.len(),
            mean_seam_gradient: mean(&seams),
        });
    }
    Ok(stats)
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().ok_or_else(|| Error::Write {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "path has no file name"),
    })?;
    let tmp: PathBuf = path.with_file_name(format!("{}.part", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|source| Error::Write {
        path: tmp.clone(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}
