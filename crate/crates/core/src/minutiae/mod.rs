//! Minutiae extraction and per-image biometric metrics.
//!
//! Pipeline: [`enhance_and_binarize`] (segmentation, local-mean
//! normalisation, orientation-steered smoothing) -> [`thin`] -> crossing
//! number [`extract_minutiae`], run on four quarter-turn views and merged by
//! [`extract_consensus`]. [`quality`] builds the seven-row metric report on
//! top.

mod consensus;
mod enhance;
mod extract;
pub mod quality;
mod thin;

use std::f64::consts::TAU;

pub use consensus::{extract_consensus, CONSENSUS_VIEWS};
pub use enhance::{enhance_and_binarize, estimate_orientation, segment, RidgeMap};
pub use extract::{crossing_number, extract_minutiae, BORDER_MARGIN};
pub use quality::{analyze_manifest, quality_report, ManifestAnalysis, quality_score, ImageMetrics, MetricSummary, QualityReport};
pub use thin::{thin, Skeleton};

use crate::raster::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MinutiaKind {
    RidgeEnding,
    Bifurcation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minutia {
    pub x: f64,
    pub y: f64,
    /// Radians in `[0, 2pi)`, pointing away from the single ridge branch.
    pub angle: f64,
    pub kind: MinutiaKind,
    pub reliability: f64,
}

impl Minutia {
    pub fn new(x: f64, y: f64, angle: f64, kind: MinutiaKind) -> Self {
        Minutia {
            x,
            y,
            angle: angle.rem_euclid(TAU),
            kind,
            reliability: 1.0,
        }
    }
}

/// Minutiae of one image together with the frame they were found in.
#[derive(Debug, Clone, PartialEq)]
pub struct MinutiaSet {
    pub width: usize,
    pub height: usize,
    pub minutiae: Vec<Minutia>,
}

impl MinutiaSet {
    pub fn new(width: usize, height: usize, minutiae: Vec<Minutia>) -> Self {
        MinutiaSet {
            width,
            height,
            minutiae,
        }
    }

    pub fn len(&self) -> usize {
        self.minutiae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minutiae.is_empty()
    }

    pub fn count(&self, kind: MinutiaKind) -> usize {
        self.minutiae.iter().filter(|m| m.kind == kind).count()
    }
}

/// Full extraction for one image, voted over its four quarter-turn views.
pub fn minutiae_from_image(img: &GrayImage) -> MinutiaSet {
    extract_consensus(img).1
}
