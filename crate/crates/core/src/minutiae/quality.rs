//! Per-image metrics and the seven-row dataset report.
//!
//! The quality figure is a proxy blended from orientation coherence,
//! minutiae reliability and foreground area; it is labelled
//! `quality_score (proxy)` everywhere and makes no claim of NFIQ2
//! compliance. Standard deviations are population (divide by N).

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::manifest::DatasetManifest;
use crate::parallel::with_workers;
use crate::raster::GrayImage;

use super::{extract_consensus, MinutiaKind, MinutiaSet, RidgeMap};

const COHERENCE_WEIGHT: f64 = 0.55;
const RELIABILITY_WEIGHT: f64 = 0.25;
const AREA_WEIGHT: f64 = 0.20;
/// Foreground fraction that earns the full area credit.
const FULL_AREA: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageMetrics {
    pub ridge_endings: f64,
    pub bifurcations: f64,
    pub ridge_reliability: f64,
    pub bifurcation_reliability: f64,
    pub bifurcation_percentage: f64,
    pub area_percentage: f64,
    pub quality: f64,
}

impl ImageMetrics {
    pub fn from_image(img: &GrayImage) -> (ImageMetrics, MinutiaSet) {
        let (map, minutiae) = extract_consensus(img);
        (Self::from_parts(&map, &minutiae), minutiae)
    }

    fn from_parts(map: &RidgeMap, minutiae: &MinutiaSet) -> ImageMetrics {
        let mean_rel = |kind: MinutiaKind| {
            let v: Vec<f64> = minutiae
                .minutiae
                .iter()
                .filter(|m| m.kind == kind)
                .map(|m| m.reliability)
                .collect();
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        let endings = minutiae.count(MinutiaKind::RidgeEnding) as f64;
        let bifs = minutiae.count(MinutiaKind::Bifurcation) as f64;
        ImageMetrics {
            ridge_endings: endings,
            bifurcations: bifs,
            ridge_reliability: mean_rel(MinutiaKind::RidgeEnding),
            bifurcation_reliability: mean_rel(MinutiaKind::Bifurcation),
            bifurcation_percentage: bifurcation_percentage(endings, bifs),
            area_percentage: 100.0 * map.mask.fraction(),
            quality: score_from_parts(map, minutiae),
        }
    }

    fn values(&self) -> [f64; 7] {
        [
            self.ridge_endings,
            self.bifurcations,
            self.ridge_reliability,
            self.bifurcation_reliability,
            self.bifurcation_percentage,
            self.area_percentage,
            self.quality,
        ]
    }
}

pub fn bifurcation_percentage(endings: f64, bifurcations: f64) -> f64 {
    let total = endings + bifurcations;
    if total > 0.0 {
        100.0 * bifurcations / total
    } else {
        0.0
    }
}

fn score_from_parts(map: &RidgeMap, minutiae: &MinutiaSet) -> f64 {
    if map.mask.is_empty() {
        return 0.0;
    }
    let f = &map.orientation;
    let mut coh = 0.0;
    let mut n = 0usize;
    for by in 0..f.blocks_y {
        for bx in 0..f.blocks_x {
            let x = (bx * f.block + f.block / 2).min(f.width - 1);
            let y = (by * f.block + f.block / 2).min(f.height - 1);
            if map.mask.get(x, y) {
                coh += f.coherence[by * f.blocks_x + bx];
                n += 1;
            }
        }
    }
    let coherence = if n > 0 { coh / n as f64 } else { 0.0 };
    let reliability = if minutiae.is_empty() {
        0.0
    } else {
        minutiae.minutiae.iter().map(|m| m.reliability).sum::<f64>() / minutiae.len() as f64
    };
    let area = (map.mask.fraction() / FULL_AREA).min(1.0);
    (100.0 * (COHERENCE_WEIGHT * coherence + RELIABILITY_WEIGHT * reliability + AREA_WEIGHT * area)).clamp(0.0, 100.0)
}

/// Composite quality proxy in `[0, 100]`; 0 for an image with no
/// detectable foreground.
pub fn quality_score(img: &GrayImage) -> f64 {
    ImageMetrics::from_image(img).0.quality
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub ridge_ending_count: MetricSummary,
    pub bifurcation_count: MetricSummary,
    pub ridge_reliability: MetricSummary,
    pub bifurcation_reliability: MetricSummary,
    pub bifurcation_percentage: MetricSummary,
    pub fingerprint_area: MetricSummary,
    pub quality_score: MetricSummary,
    pub images: usize,
    pub skipped: usize,
}

pub const REPORT_ROWS: [&str; 7] = [
    "Ridge Ending Minutiae Count",
    "Bifurcation Minutiae Count",
    "Reliability of Ridge Minutiae",
    "Reliability of Bifurcation Minutiae",
    "Percentage of Bifurcation Minutiae",
    "Area of the Fingerprint (% of frame)",
    "quality_score (proxy)",
];

impl QualityReport {
    /// Mean and population std of every metric.
    pub fn aggregate(metrics: &[ImageMetrics]) -> QualityReport {
        let n = metrics.len();
        let mut sums = [0.0f64; 7];
        for m in metrics {
            for (s, v) in sums.iter_mut().zip(m.values()) {
                *s += v;
            }
        }
        let means = sums.map(|s| if n > 0 { s / n as f64 } else { 0.0 });
        let mut sq = [0.0f64; 7];
        for m in metrics {
            for ((acc, v), mean) in sq.iter_mut().zip(m.values()).zip(means) {
                *acc += (v - mean) * (v - mean);
            }
        }
        let s = |i: usize| MetricSummary {
            mean: means[i],
            std: if n > 0 { (sq[i] / n as f64).sqrt() } else { 0.0 },
        };
        QualityReport {
            ridge_ending_count: s(0),
            bifurcation_count: s(1),
            ridge_reliability: s(2),
            bifurcation_reliability: s(3),
            bifurcation_percentage: s(4),
            fingerprint_area: s(5),
            quality_score: s(6),
            images: n,
            skipped: 0,
        }
    }

    pub fn rows(&self) -> [(&'static str, MetricSummary); 7] {
        [
            (REPORT_ROWS[0], self.ridge_ending_count),
            (REPORT_ROWS[1], self.bifurcation_count),
            (REPORT_ROWS[2], self.ridge_reliability),
            (REPORT_ROWS[3], self.bifurcation_reliability),
            (REPORT_ROWS[4], self.bifurcation_percentage),
            (REPORT_ROWS[5], self.fingerprint_area),
            (REPORT_ROWS[6], self.quality_score),
        ]
    }

    /// Seven metric rows with mean and std columns, two decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# images={} skipped={} std=population", self.images, self.skipped);
        out.push_str("measure,mean,std\n");
        for (name, s) in self.rows() {
            let _ = writeln!(out, "{name},{:.2},{:.2}", s.mean, s.std);
        }
        out
    }
}

/// Per-image results of [`analyze_manifest`], in manifest order.
#[derive(Debug, Clone)]
pub struct ManifestAnalysis {
    pub report: QualityReport,
    /// `None` where the image could not be read.
    pub templates: Vec<Option<MinutiaSet>>,
}

impl ManifestAnalysis {
    pub fn missing(&self) -> usize {
        self.report.skipped
    }
}

/// Metrics and minutiae for every readable image in the manifest;
/// unreadable images are skipped with a warning and counted.
pub fn analyze_manifest(manifest: &DatasetManifest, base: &Path, workers: usize) -> ManifestAnalysis {
    let results: Vec<Option<(ImageMetrics, MinutiaSet)>> = with_workers(workers, || {
        manifest
            .records
            .par_iter()
            .map(|r| match GrayImage::load_png(&base.join(&r.path)) {
                Ok(img) => Some(ImageMetrics::from_image(&img)),
                Err(e) => {
                    log::warn!("skipping {}: {e}", r.path);
                    None
                }
            })
            .collect()
    });
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let metrics: Vec<ImageMetrics> = results.iter().flatten().map(|(m, _)| *m).collect();
    let mut report = QualityReport::aggregate(&metrics);
    report.skipped = skipped;
    ManifestAnalysis {
        report,
        templates: results.into_iter().map(|r| r.map(|(_, t)| t)).collect(),
    }
}

/// Seven-metric summary of the images listed in a manifest.
pub fn quality_report(manifest: &DatasetManifest, base: &Path, workers: usize) -> QualityReport {
    analyze_manifest(manifest, base, workers).report
}
