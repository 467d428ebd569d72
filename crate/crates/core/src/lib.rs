//! Synthesis of malignant mammogram training samples from benign images.
//!
//! The library turns a benign image, a saliency map, and an annotated
//! malignant donor patch into a labeled synthetic sample in three stages:
//! saliency-guided region selection, low-frequency spectral style transfer,
//! and Gaussian soft-mask blending. Hard-paste and style-transfer-only
//! variants of the final stage are available for side-by-side comparison,
//! and every run is reproducible from a single seed.

pub mod error;
pub mod fourier;
pub mod imaging;
pub mod pipeline;
pub mod region;
pub mod seed;
pub mod softmask;

pub use error::{Error, Result};
pub use imaging::{GrayImage, RegionSpec, SaliencyMap};
pub use pipeline::{SynthesisConfig, SynthesisMode, SynthesizedSample};
