//! Procedural presentation-attack appearance per spoof material, the
//! unpaired-translation training objective, and live/spoof balance checks.
//!
//! Recipes are texture transforms only: they never move ridges, so a
//! spoof keeps the identity of its live source. Externally produced spoof
//! images can be used instead by listing them in a manifest.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::impression::{fingerprint_mask, MASK_THRESHOLD};
use crate::manifest::DatasetManifest;
use crate::raster::{BinaryMask, GrayImage};
use crate::rng::RngStream;
use crate::types::Material;

/// Closing radius that turns the dark-pixel mask into a solid region.
const REGION_CLOSING: f32 = 6.0;
pub const MAX_DROPOUT: f64 = 0.3;
/// Grid spacing of the low-frequency field that picks dropout patches.
const DROPOUT_CELL: usize = 24;
/// Intensity an erased ridge pixel is lifted to.
const ERASED_LEVEL: f64 = 225.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpoofRecipe {
    pub material: Material,
    pub blur_sigma: f64,
    pub noise_std: f64,
    pub tone_gamma: f64,
    pub dropout_rate: f64,
    pub global_tint: f64,
}

impl SpoofRecipe {
    /// Default look for a spoof material.
    pub fn for_material(material: Material) -> Result<SpoofRecipe> {
        let (blur_sigma, noise_std, tone_gamma, dropout_rate, global_tint) = match material {
            Material::Live => {
                return Err(Error::InvalidArgument("no spoof recipe for live material".into()));
            }
            Material::EcoFlex => (1.0, 6.0, 0.9, 0.05, 10.0),
            // Soft dough smears ridges and loses large patches.
            Material::PlayDoh => (1.5, 10.0, 0.7, 0.25, 12.0),
            Material::WoodGlue => (1.2, 5.0, 1.2, 0.10, 15.0),
            Material::Gelatine => (2.0, 12.0, 1.0, 0.05, 0.0),
            Material::Latex => (0.8, 4.0, 1.1, 0.08, 20.0),
            Material::Oomoo => (1.3, 8.0, 0.85, 0.15, 5.0),
            Material::Silicone => (0.6, 3.0, 1.3, 0.03, 8.0),
            Material::BodyDouble => (1.0, 7.0, 0.95, 0.12, 6.0),
        };
        Ok(SpoofRecipe {
            material,
            blur_sigma,
            noise_std,
            tone_gamma,
            dropout_rate,
            global_tint,
        })
    }

    /// Recipe that leaves every pixel unchanged.
    pub fn neutral(material: Material) -> SpoofRecipe {
        SpoofRecipe {
            material,
            blur_sigma: 0.0,
            noise_std: 0.0,
            tone_gamma: 1.0,
            dropout_rate: 0.0,
            global_tint: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.material.is_live() {
            return Err(Error::InvalidArgument("spoof recipe cannot target live material".into()));
        }
        let fields = [self.blur_sigma, self.noise_std, self.tone_gamma, self.dropout_rate, self.global_tint];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!("recipe parameters must be finite and non-negative: {self:?}")));
        }
        if self.tone_gamma == 0.0 || self.dropout_rate > MAX_DROPOUT {
            return Err(Error::InvalidArgument(format!("gamma must be positive and dropout at most {MAX_DROPOUT}: {self:?}")));
        }
        Ok(())
    }
}

/// Pixels the recipe may touch: dark fingerprint pixels closed into a
/// solid region.
pub fn spoof_region(img: &GrayImage) -> BinaryMask {
    fingerprint_mask(img, MASK_THRESHOLD).dilate(REGION_CLOSING).erode(REGION_CLOSING)
}

fn gaussian_blur(src: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    let pass = |src: &[f64], horizontal: bool| {
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (t, &kv) in k.iter().enumerate() {
                    let o = t as i64 - r;
                    let (sx, sy) = if horizontal {
                        ((x as i64 + o).clamp(0, w as i64 - 1) as usize, y)
                    } else {
                        (x, (y as i64 + o).clamp(0, h as i64 - 1) as usize)
                    };
                    acc += kv * src[sy * w + sx];
                }
                out[y * w + x] = acc;
            }
        }
        out
    };
    pass(&pass(src, true), false)
}

/// Smooth random field in [0, 1) from bilinearly interpolated grid values.
fn patch_field(w: usize, h: usize, rng: &mut RngStream) -> Vec<f64> {
    let gw = w / DROPOUT_CELL + 2;
    let gh = h / DROPOUT_CELL + 2;
    let grid: Vec<f64> = (0..gw * gh).map(|_| rng.uniform(0.0, 1.0)).collect();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let fy = y as f64 / DROPOUT_CELL as f64;
        let (gy, ty) = (fy as usize, fy.fract());
        for x in 0..w {
            let fx = x as f64 / DROPOUT_CELL as f64;
            let (gx, tx) = (fx as usize, fx.fract());
            let g = |i: usize, j: usize| grid[j * gw + i];
            let top = g(gx, gy) * (1.0 - tx) + g(gx + 1, gy) * tx;
            let bot = g(gx, gy + 1) * (1.0 - tx) + g(gx + 1, gy + 1) * tx;
            out[y * w + x] = top * (1.0 - ty) + bot * ty;
        }
    }
    out
}

/// Applies blur, tone curve, additive noise, ridge dropout and tint, in
/// that order, inside the fingerprint region only.
pub fn apply_recipe(img: &GrayImage, recipe: &SpoofRecipe, rng: &RngStream) -> Result<GrayImage> {
    recipe.validate()?;
    let (w, h) = (img.width(), img.height());
    let region = spoof_region(img);
    let orig: Vec<f64> = img.pixels().iter().map(|&p| p as f64).collect();
    let mut v = if recipe.blur_sigma > 0.0 {
        gaussian_blur(&orig, w, h, recipe.blur_sigma)
    } else {
        orig.clone()
    };
    if recipe.tone_gamma != 1.0 {
        for p in &mut v {
            *p = 255.0 * (p.clamp(0.0, 255.0) / 255.0).powf(recipe.tone_gamma);
        }
    }
    if recipe.noise_std > 0.0 {
        let mut noise = rng.fork("spoof-noise");
        for (i, p) in v.iter_mut().enumerate() {
            // Draw for every pixel so the stream does not depend on the mask.
            let n = noise.normal();
            if region.bits()[i] {
                *p += recipe.noise_std * n;
            }
        }
    }
    if recipe.dropout_rate > 0.0 && !region.is_empty() {
        let field = patch_field(w, h, &mut rng.fork("spoof-dropout"));
        let inside: Vec<f64> = (0..w * h).filter(|&i| region.bits()[i]).map(|i| orig[i]).collect();
        let mean = inside.iter().sum::<f64>() / inside.len() as f64;
        for i in 0..w * h {
            if region.bits()[i] && orig[i] < mean && field[i] < recipe.dropout_rate {
                v[i] = v[i].max(ERASED_LEVEL);
            }
        }
    }
    let mut out = img.clone();
    for (i, px) in out.pixels_mut().iter_mut().enumerate() {
        if region.bits()[i] {
            *px = (v[i] + recipe.global_tint).round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(out)
}

/// Material-specific spoof rendering of a live impression.
pub fn apply_spoof(img: &GrayImage, material: Material, rng: &RngStream) -> Result<GrayImage> {
    apply_recipe(img, &SpoofRecipe::for_material(material)?, rng)
}

pub const LAMBDA_CYCLE: f64 = 10.0;
pub const LAMBDA_IDENTITY: f64 = 0.5;

/// Loss terms of an unpaired image-translation objective with two
/// adversarial directions, a cycle term and an identity term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleGANObjective {
    pub l_gan_ab: f64,
    pub l_gan_ba: f64,
    pub l_cyc: f64,
    pub l_id: f64,
    pub lambda_cyc: f64,
    pub lambda_id: f64,
}

impl CycleGANObjective {
    /// Losses with the default weights.
    pub fn new(l_gan_ab: f64, l_gan_ba: f64, l_cyc: f64, l_id: f64) -> Self {
        CycleGANObjective {
            l_gan_ab,
            l_gan_ba,
            l_cyc,
            l_id,
            lambda_cyc: LAMBDA_CYCLE,
            lambda_id: LAMBDA_IDENTITY,
        }
    }
}

/// `l_gan_ab + l_gan_ba + lambda_cyc * l_cyc + lambda_id * l_id`.
pub fn cyclegan_objective(obj: &CycleGANObjective) -> Result<f64> {
    let parts = [
        ("l_gan_ab", obj.l_gan_ab),
        ("l_gan_ba", obj.l_gan_ba),
        ("l_cyc", obj.l_cyc),
        ("l_id", obj.l_id),
        ("lambda_cyc", obj.lambda_cyc),
        ("lambda_id", obj.lambda_id),
    ];
    if let Some((name, v)) = parts.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument(format!("{name} must be finite and non-negative, got {v}")));
    }
    Ok(obj.l_gan_ab + obj.l_gan_ba + obj.lambda_cyc * obj.l_cyc + obj.lambda_id * obj.l_id)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaterialBalance {
    pub material: Material,
    pub live: usize,
    pub spoof: usize,
    pub balanced: bool,
    /// Absolute difference between the live and spoof counts.
    pub deficit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceReport {
    pub live: usize,
    pub materials: Vec<MaterialBalance>,
}

impl BalanceReport {
    pub fn balanced(&self) -> bool {
        self.materials.iter().all(|m| m.balanced)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("material,live,spoof,balanced,deficit\n");
        for m in &self.materials {
            out += &format!("{},{},{},{},{}\n", m.material, m.live, m.spoof, m.balanced, m.deficit);
        }
        out
    }
}

/// Compares every spoof material present in the manifest against the
/// number of live records.
pub fn validate_balanced(manifest: &DatasetManifest) -> BalanceReport {
    let mut counts: BTreeMap<Material, usize> = BTreeMap::new();
    for r in &manifest.records {
        *counts.entry(r.material).or_default() += 1;
    }
    let live = counts.get(&Material::Live).copied().unwrap_or(0);
    let materials = counts
        .iter()
        .filter(|(m, _)| !m.is_live())
        .map(|(&material, &spoof)| MaterialBalance {
            material,
            live,
            spoof,
            balanced: live == spoof,
            deficit: live.abs_diff(spoof),
        })
        .collect();
    BalanceReport { live, materials }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::Record;
    use crate::types::FingerClass;

    fn print_like() -> GrayImage {
        GrayImage::from_fn(512, 512, |x, y| {
            let (dx, dy) = (x as f64 - 256.0, y as f64 - 256.0);
            if dx * dx / 120.0f64.powi(2) + dy * dy / 160.0f64.powi(2) > 1.0 {
                255
            } else {
                (135.0 - 100.0 * (x as f64 * 0.7).sin()).round() as u8
            }
        })
    }

    #[test]
    fn neutral_recipe_is_identity() {
        let img = print_like();
        let out = apply_recipe(&img, &SpoofRecipe::neutral(Material::Latex), &RngStream::from_seed(1)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn live_is_rejected() {
        let img = print_like();
        assert!(matches!(apply_spoof(&img, Material::Live, &RngStream::from_seed(1)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn materials_differ_and_background_is_kept() {
        let img = print_like();
        let rng = RngStream::from_seed(2);
        let region = spoof_region(&img);
        let outs: Vec<GrayImage> = Material::SPOOFS.iter().map(|&m| apply_spoof(&img, m, &rng).unwrap()).collect();
        for (i, a) in outs.iter().enumerate() {
            for b in &outs[i + 1..] {
                assert!(a.mean_abs_diff(b) > 0.0);
            }
            for (k, (&p, &q)) in a.pixels().iter().zip(img.pixels()).enumerate() {
                if !region.bits()[k] {
                    assert_eq!(p, q);
                }
            }
        }
    }

    #[test]
    fn deterministic_per_stream() {
        let img = print_like();
        let a = apply_spoof(&img, Material::PlayDoh, &RngStream::from_seed(3)).unwrap();
        let b = apply_spoof(&img, Material::PlayDoh, &RngStream::from_seed(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recipes_are_valid() {
        for m in Material::SPOOFS {
            SpoofRecipe::for_material(m).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn objective_values() {
        assert_eq!(cyclegan_objective(&CycleGANObjective::new(0.0, 0.0, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(cyclegan_objective(&CycleGANObjective::new(1.0, 1.0, 2.0, 0.0)).unwrap(), 22.0);
        assert_eq!(cyclegan_objective(&CycleGANObjective::new(0.5, 0.5, 1.0, 1.0)).unwrap(), 11.5);
        assert!(cyclegan_objective(&CycleGANObjective::new(-0.1, 0.0, 0.0, 0.0)).is_err());
    }

    fn records(material: Material, n: usize) -> Vec<Record> {
        (0..n)
            .map(|i| Record {
                path: format!("{material}/{i}.png"),
                subject: i as u64,
                class: FingerClass::new(1).unwrap(),
                impression: 1,
                material,
            })
            .collect()
    }

    #[test]
    fn balance_verdicts() {
        let mut r = records(Material::Live, 1095);
        r.extend(records(Material::BodyDouble, 1095));
        assert!(validate_balanced(&DatasetManifest::new(r)).balanced());

        let mut r = records(Material::Live, 748);
        r.extend(records(Material::EcoFlex, 748));
        assert!(validate_balanced(&DatasetManifest::new(r)).balanced());

        let mut r = records(Material::Live, 10);
        r.extend(records(Material::PlayDoh, 9));
        let rep = validate_balanced(&DatasetManifest::new(r));
        assert!(!rep.balanced());
        assert_eq!(rep.materials[0].deficit, 1);
    }
}
