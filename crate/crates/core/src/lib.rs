//! Class-conditioned synthetic fingerprint generation and biometric evaluation.
//!
//! The crate is organised along the generation/evaluation pipeline:
//!
//! * [`types`], [`raster`], [`rng`], [`manifest`]: shared domain types, images,
//!   deterministic per-image random streams and the JSONL label manifest.
//! * [`masterprint`]: procedural master prints (orientation field + iterative Gabor growth).
//! * [`impression`]: rigid transform, RBF elastic warp, mask and contrast jitter.
//! * [`spoof`]: material-specific spoof appearance and the CycleGAN objective arithmetic.
//! * [`minutiae`]: enhancement, thinning, crossing-number extraction, quality metrics.
//! * [`matcher`]: Hough-aligned minutiae matching.
//! * [`eval`]: pair protocols, TAR/FAR, histograms, uniqueness and privacy scans.
//! * [`dataset`]: end-to-end dataset generation used by the CLI.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod impression;
pub mod manifest;
pub mod masterprint;
pub mod matcher;
pub mod minutiae;
pub mod parallel;
pub mod raster;
pub mod rng;
pub mod spoof;
pub mod types;

pub use dataset::GenerateSpec;
pub use error::{Error, Result};
pub use manifest::{DatasetManifest, Record};
pub use matcher::{match_minutiae, MatchScore};
pub use minutiae::{Minutia, MinutiaKind, MinutiaSet, QualityReport};
pub use raster::{BinaryMask, GrayImage, FRAME_SIZE};
pub use rng::{derive_rng, RngStream};
pub use types::{FingerClass, Material};
