//! JSON Lines dataset manifests and output records.
//!
//! Input manifests mix two entry kinds, told apart by their fields: donor
//! entries carry `bbox` and `lesion`, benign entries carry `saliency` and an
//! optional `breast_mask`. Relative paths are resolved against the manifest's
//! directory when loading. Coordinates are 0-based pixel indices, bboxes are
//! `[top, left, height, width]`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{Label, Provenance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenignEntry {
    pub id: String,
    pub image: String,
    pub saliency: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub breast_mask: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DonorEntry {
    pub id: String,
    pub image: String,
    /// `[top, left, height, width]` of the annotated finding.
    pub bbox: [usize; 4],
    pub lesion: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ManifestLine {
    Donor(DonorEntry),
    Benign(BenignEntry),
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub benign: Vec<BenignEntry>,
    pub donors: Vec<DonorEntry>,
}

/// Parses a JSON Lines manifest, resolving relative paths against the
/// manifest's parent directory. Blank lines are skipped; a malformed line is
/// an error naming its line number.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    let mut manifest = Manifest::default();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ManifestLine = serde_json::from_str(line).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            line: lineno + 1,
            detail: e.to_string(),
        })?;
        match parsed {
            ManifestLine::Donor(mut d) => {
                d.image = resolve(&base, &d.image);
                if d.bbox[2] == 0 || d.bbox[3] == 0 {
                    return Err(Error::Manifest {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        detail: format!("degenerate bbox {:?}", d.bbox),
                    });
                }
                manifest.donors.push(d);
            }
            ManifestLine::Benign(mut b) => {
                b.image = resolve(&base, &b.image);
                b.saliency = resolve(&base, &b.saliency);
                b.breast_mask = b.breast_mask.map(|m| resolve(&base, &m));
                manifest.benign.push(b);
            }
        }
    }
    Ok(manifest)
}

fn resolve(base: &Path, raw: &str) -> String {
    let p = Path::new(raw);
    if p.is_absolute() {
        raw.to_string()
    } else {
        base.join(p).to_string_lossy().into_owned()
    }
}

/// One line of the output manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub id: String,
    /// Path of the synthesized image, relative to the output directory.
    pub image: String,
    pub label: Label,
    pub provenance: SampleProvenance,
}

/// Synthesis parameters plus the resolved input paths; a sample can be
/// regenerated from this record alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleProvenance {
    #[serde(flatten)]
    pub synthesis: Provenance,
    pub benign_image: String,
    pub saliency: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub breast_mask: Option<String>,
    pub donor_image: String,
    pub donor_bbox: [usize; 4],
}

/// Reads an output manifest written by a batch run.
pub fn load_output_manifest(path: &Path) -> Result<Vec<OutputRecord>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: OutputRecord = serde_json::from_str(line).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            line: lineno + 1,
            detail: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
