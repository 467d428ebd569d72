//! Error type shared by all modules.

use std::path::PathBuf;

use thiserror::Error;

use crate::imaging::RegionSpec;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: unsupported format: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("{path}: expected a single-channel image, got {detail}")]
    MultiChannel { path: PathBuf, detail: String },

    #[error("{path}: unsupported bit depth: {detail}")]
    UnsupportedDepth { path: PathBuf, detail: String },

    #[error("invalid pixel data: {0}")]
    InvalidPixels(String),

    #[error("dimension mismatch: expected {expected_height}x{expected_width}, got {got_height}x{got_width}")]
    DimensionMismatch {
        expected_height: usize,
        expected_width: usize,
        got_height: usize,
        got_width: usize,
    },

    #[error("region (top={}, left={}, height={}, width={}) out of bounds for a {height}x{width} image", region.top, region.left, region.height, region.width)]
    RegionOutOfBounds {
        region: RegionSpec,
        height: usize,
        width: usize,
    },

    #[error("no candidate placement satisfies the selection constraints")]
    NoValidRegion,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inverse transform left an imaginary residue of {residue:.3e} (limit {limit:.3e}); the spectrum is not Hermitian")]
    NonHermitianSpectrum { residue: f64, limit: f64 },

    #[error("manifest {path}, line {line}: {detail}")]
    Manifest {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("manifest has no usable benign/donor pairs")]
    EmptyManifest,

    #[error("all {count} batch entries failed; first error: {first}")]
    BatchFailed { count: usize, first: String },
}

pub type Result<T> = std::result::Result<T, Error>;
