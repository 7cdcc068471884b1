//! Whole-dataset generation: master prints, impressions and optional spoof
//! rendering for a grid of subjects and finger classes.
//!
//! Every image depends only on `(seed, subject, class, impression)`, so the
//! output is identical for any worker count.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::impression::generate_impression;
use crate::manifest::{write_manifest, DatasetManifest, Record};
use crate::masterprint::{synthesize_master, MasterPrintParams};
use crate::minutiae::{minutiae_from_image, MinutiaSet};
use crate::parallel::with_workers;
use crate::raster::GrayImage;
use crate::rng::derive_rng;
use crate::spoof::apply_spoof;
use crate::types::{FingerClass, Material};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateSpec {
    pub classes: Vec<FingerClass>,
    pub subjects: u64,
    pub impressions: u32,
    pub material: Material,
    pub master_seed: u64,
}

impl GenerateSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::InvalidArgument("at least one finger class is required".into()));
        }
        if self.subjects == 0 || self.impressions == 0 {
            return Err(Error::InvalidArgument("subject and impression counts must be at least 1".into()));
        }
        let mut sorted = self.classes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.classes.len() {
            return Err(Error::InvalidArgument("finger classes must not repeat".into()));
        }
        Ok(())
    }

    pub fn image_count(&self) -> u64 {
        self.classes.len() as u64 * self.subjects * self.impressions as u64
    }

    /// Every (subject, class) finger in output order.
    fn fingers(&self) -> Vec<(u64, FingerClass)> {
        (0..self.subjects)
            .flat_map(|s| self.classes.iter().map(move |&c| (s, c)))
            .collect()
    }
}

/// Relative path of one image: `<material>/<class>/<subject>_<impression>.png`.
pub fn image_path(material: Material, class: FingerClass, subject: u64, impression: u32) -> String {
    format!("{material}/{}/{subject}_{impression}.png", class.index())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedImage {
    pub record: Record,
    pub image: GrayImage,
}

/// All impressions of one finger; spoof materials are rendered from the
/// live impression with a stream forked from the impression's own.
pub fn render_finger(spec: &GenerateSpec, subject: u64, class: FingerClass) -> Result<Vec<GeneratedImage>> {
    let mut rng = derive_rng(spec.master_seed, subject, class, 0);
    let params = MasterPrintParams::sample(class, &mut rng);
    let master = synthesize_master(&params, class, &mut rng)?;
    (1..=spec.impressions)
        .map(|i| {
            let mut r = derive_rng(spec.master_seed, subject, class, i);
            let live = generate_impression(&master.image, &mut r);
            let image = if spec.material.is_live() {
                live
            } else {
                apply_spoof(&live, spec.material, &r.fork("spoof"))?
            };
            Ok(GeneratedImage {
                record: Record {
                    path: image_path(spec.material, class, subject, i),
                    subject,
                    class,
                    impression: i,
                    material: spec.material,
                },
                image,
            })
        })
        .collect()
}

fn per_finger<T: Send>(
    spec: &GenerateSpec,
    workers: usize,
    f: impl Fn(Vec<GeneratedImage>) -> Result<Vec<T>> + Sync,
) -> Result<Vec<T>> {
    spec.validate()?;
    let fingers = spec.fingers();
    let chunks: Vec<Result<Vec<T>>> = with_workers(workers, || {
        fingers
            .par_iter()
            .map(|&(s, c)| render_finger(spec, s, c).and_then(&f))
            .collect()
    });
    let mut out = Vec::with_capacity(spec.image_count() as usize);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Generates the dataset in memory, ordered by subject, class, impression.
pub fn generate(spec: &GenerateSpec, workers: usize) -> Result<Vec<GeneratedImage>> {
    per_finger(spec, workers, Ok)
}

/// Generates the dataset and keeps only each image's minutiae.
pub fn generate_templates(spec: &GenerateSpec, workers: usize) -> Result<Vec<(Record, MinutiaSet)>> {
    per_finger(spec, workers, |imgs| {
        Ok(imgs.into_iter().map(|g| (g.record, minutiae_from_image(&g.image))).collect())
    })
}

/// Writes every image as PNG under `out` plus `out/manifest.jsonl`.
pub fn generate_to_dir(spec: &GenerateSpec, out: &Path, workers: usize) -> Result<DatasetManifest> {
    let records = per_finger(spec, workers, |imgs| {
        imgs.into_iter()
            .map(|g| {
                g.image.save_png(&out.join(&g.record.path))?;
                Ok(g.record)
            })
            .collect()
    })?;
    let manifest = DatasetManifest::new(records);
    write_manifest(&manifest, &out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(material: Material) -> GenerateSpec {
        GenerateSpec {
            classes: vec![FingerClass::new(2).unwrap()],
            subjects: 1,
            impressions: 2,
            material,
            master_seed: 11,
        }
    }

    #[test]
    fn layout_and_order() {
        let imgs = generate(&spec(Material::Live), 1).unwrap();
        let paths: Vec<&str> = imgs.iter().map(|g| g.record.path.as_str()).collect();
        assert_eq!(paths, ["Live/2/0_1.png", "Live/2/0_2.png"]);
    }

    #[test]
    fn spoof_differs_from_live() {
        let live = generate(&spec(Material::Live), 1).unwrap();
        let spoof = generate(&spec(Material::Gelatine), 1).unwrap();
        assert!(live[0].image.mean_abs_diff(&spoof[0].image) > 0.0);
        assert_eq!(spoof[0].record.path, "Gelatine/2/0_1.png");
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(Material::Live);
        s.classes.clear();
        assert!(generate(&s, 1).is_err());
        let mut s = spec(Material::Live);
        s.impressions = 0;
        assert!(s.validate().is_err());
    }
}
