//! Multiple impressions of one master print.
//!
//! Four steps, always in this order: rigid placement (translation then
//! rotation about the frame centre), a Gaussian radial-basis elastic warp,
//! a dark-pixel fingerprint mask at intensity 180, and contrast/brightness
//! jitter confined to that mask.

use crate::raster::{BinaryMask, GrayImage, WHITE};
use crate::rng::RngStream;

pub const MAX_TRANSLATION: f64 = 10.0;
pub const MAX_ROTATION_DEG: f64 = 30.0;
pub const MASK_THRESHOLD: u8 = 180;
pub const ALPHA_RANGE: (f64, f64) = (0.7, 1.3);
pub const BETA_RANGE: (f64, f64) = (-30.0, 30.0);
pub const MAX_CONTROL_WEIGHT: f64 = 8.0;
pub const MIN_SIGMA: f64 = 40.0;
pub const MIN_CONTROLS: usize = 4;
pub const MAX_CONTROLS: usize = 32;
/// Hard bound on the elastic displacement magnitude, px.
pub const FIELD_BOUND: f64 = 12.0;
const CONTROL_GRID: usize = 4;
const SIGMA_RANGE: (f64, f64) = (40.0, 55.0);
/// Control-point grid extent used when no fingerprint box is known.
const DEFAULT_BOX: (f64, f64, f64, f64) = (96.0, 96.0, 416.0, 416.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPoint {
    pub x: f64,
    pub y: f64,
    pub wx: f64,
    pub wy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpressionParams {
    pub dx: f64,
    pub dy: f64,
    /// Degrees; positive turns +x toward +y.
    pub angle: f64,
    pub controls: Vec<ControlPoint>,
    pub sigma: f64,
    pub mask_threshold: u8,
    pub alpha: f64,
    pub beta: f64,
}

impl ImpressionParams {
    /// Parameters under which the pipeline reproduces its input.
    pub fn identity() -> Self {
        ImpressionParams {
            dx: 0.0,
            dy: 0.0,
            angle: 0.0,
            controls: Vec::new(),
            sigma: MIN_SIGMA,
            mask_threshold: MASK_THRESHOLD,
            alpha: 1.0,
            beta: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.dx.abs() <= MAX_TRANSLATION
            && self.dy.abs() <= MAX_TRANSLATION
            && self.angle.abs() <= MAX_ROTATION_DEG
            && (ALPHA_RANGE.0..=ALPHA_RANGE.1).contains(&self.alpha)
            && (BETA_RANGE.0..=BETA_RANGE.1).contains(&self.beta)
            && self.sigma >= MIN_SIGMA
            && (self.controls.is_empty() || (MIN_CONTROLS..=MAX_CONTROLS).contains(&self.controls.len()))
            && self
                .controls
                .iter()
                .all(|c| c.wx.hypot(c.wy) <= MAX_CONTROL_WEIGHT + 1e-12)
    }
}

/// Uniform draw of every impression parameter, with the control grid spread
/// over the central part of the frame.
pub fn sample_params(rng: &mut RngStream) -> ImpressionParams {
    sample_params_within(rng, DEFAULT_BOX)
}

/// As [`sample_params`], with the 4x4 jittered control grid laid over the
/// box `(x0, y0, x1, y1)`.
pub fn sample_params_within(rng: &mut RngStream, bbox: (f64, f64, f64, f64)) -> ImpressionParams {
    let dx = rng.uniform(-MAX_TRANSLATION, MAX_TRANSLATION);
    let dy = rng.uniform(-MAX_TRANSLATION, MAX_TRANSLATION);
    let angle = rng.uniform(-MAX_ROTATION_DEG, MAX_ROTATION_DEG);
    let alpha = rng.uniform(ALPHA_RANGE.0, ALPHA_RANGE.1);
    let beta = rng.uniform(BETA_RANGE.0, BETA_RANGE.1);
    let sigma = rng.uniform(SIGMA_RANGE.0, SIGMA_RANGE.1);
    let (x0, y0, x1, y1) = bbox;
    let cw = (x1 - x0) / CONTROL_GRID as f64;
    let ch = (y1 - y0) / CONTROL_GRID as f64;
    let mut controls = Vec::with_capacity(CONTROL_GRID * CONTROL_GRID);
    for gy in 0..CONTROL_GRID {
        for gx in 0..CONTROL_GRID {
            let x = x0 + (gx as f64 + 0.5 + rng.uniform(-0.3, 0.3)) * cw;
            let y = y0 + (gy as f64 + 0.5 + rng.uniform(-0.3, 0.3)) * ch;
            // Uniform over the disk of radius MAX_CONTROL_WEIGHT.
            let r = MAX_CONTROL_WEIGHT * rng.uniform(0.0, 1.0).sqrt();
            let t = rng.uniform(0.0, std::f64::consts::TAU);
            controls.push(ControlPoint {
                x,
                y,
                wx: r * t.cos(),
                wy: r * t.sin(),
            });
        }
    }
    ImpressionParams {
        dx,
        dy,
        angle,
        controls,
        sigma,
        mask_threshold: MASK_THRESHOLD,
        alpha,
        beta,
    }
}

/// Translate by (dx, dy), then rotate about the frame centre. Bilinear
/// resampling, white outside the source.
pub fn apply_rigid(img: &GrayImage, dx: f64, dy: f64, angle_deg: f64) -> GrayImage {
    if dx == 0.0 && dy == 0.0 && angle_deg == 0.0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (s, c) = angle_deg.to_radians().sin_cos();
    GrayImage::from_fn(w, h, |x, y| {
        // inverse of p' = R (p + t - c) + c
        let (ux, uy) = (x as f64 - cx, y as f64 - cy);
        let sx = c * ux + s * uy + cx - dx;
        let sy = -s * ux + c * uy + cy - dy;
        img.sample_bilinear(sx, sy, WHITE).round() as u8
    })
}

/// Gaussian RBF displacement `sum_i w_i exp(-|p - c_i|^2 / (2 sigma^2))`.
pub fn rbf_displacement(controls: &[ControlPoint], sigma: f64, at: (f64, f64)) -> (f64, f64) {
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut ux = 0.0;
    let mut uy = 0.0;
    for c in controls {
        let d2 = (at.0 - c.x).powi(2) + (at.1 - c.y).powi(2);
        let k = (-d2 * inv).exp();
        ux += c.wx * k;
        uy += c.wy * k;
    }
    (ux, uy)
}

/// Displacement actually applied at a point: the RBF sum, radially
/// squashed so its magnitude never exceeds [`FIELD_BOUND`].
pub fn bounded_displacement(controls: &[ControlPoint], sigma: f64, at: (f64, f64)) -> (f64, f64) {
    let (ux, uy) = rbf_displacement(controls, sigma, at);
    let m = ux.hypot(uy);
    if m <= FIELD_BOUND {
        (ux, uy)
    } else {
        (ux * FIELD_BOUND / m, uy * FIELD_BOUND / m)
    }
}

/// Backward warp: `out(p) = in(p - u(p))`.
pub fn apply_deformation(img: &GrayImage, params: &ImpressionParams) -> GrayImage {
    if params.controls.iter().all(|c| c.wx == 0.0 && c.wy == 0.0) {
        return img.clone();
    }
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let p = (x as f64, y as f64);
        let (ux, uy) = bounded_displacement(&params.controls, params.sigma, p);
        img.sample_bilinear(p.0 - ux, p.1 - uy, WHITE).round() as u8
    })
}

/// Fingerprint area: pixels darker than `threshold`.
pub fn fingerprint_mask(img: &GrayImage, threshold: u8) -> BinaryMask {
    BinaryMask::from_fn(img.width(), img.height(), |x, y| img.get(x, y) < threshold)
}

/// `clamp(alpha * in + beta)` inside the mask; untouched elsewhere.
pub fn adjust_contrast(img: &GrayImage, mask: &BinaryMask, alpha: f64, beta: f64) -> GrayImage {
    let mut out = img.clone();
    for (p, &m) in out.pixels_mut().iter_mut().zip(mask.bits()) {
        if m {
            *p = (alpha * *p as f64 + beta).round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

/// Runs the four impression steps with fixed parameters.
pub fn render_impression(master: &GrayImage, params: &ImpressionParams) -> GrayImage {
    let placed = apply_rigid(master, params.dx, params.dy, params.angle);
    let warped = apply_deformation(&placed, params);
    let mask = fingerprint_mask(&warped, params.mask_threshold);
    adjust_contrast(&warped, &mask, params.alpha, params.beta)
}

/// Draws parameters from `rng` (control grid over the master's dark-pixel
/// bounding box) and renders the impression.
pub fn generate_impression(master: &GrayImage, rng: &mut RngStream) -> GrayImage {
    let bbox = fingerprint_mask(master, MASK_THRESHOLD)
        .bounding_box()
        .map(|(x0, y0, x1, y1)| (x0 as f64, y0 as f64, x1 as f64, y1 as f64))
        .unwrap_or(DEFAULT_BOX);
    let params = sample_params_within(rng, bbox);
    render_impression(master, &params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dark_centroid(img: &GrayImage) -> (f64, f64) {
        let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
        for y in 0..img.height() {
            for x in 0..img.width() {
                let w = 255.0 - img.get(x, y) as f64;
                sx += w * x as f64;
                sy += w * y as f64;
                sw += w;
            }
        }
        (sx / sw, sy / sw)
    }

    #[test]
    fn sampled_params_in_range() {
        let mut rng = RngStream::from_seed(1);
        for _ in 0..2000 {
            let p = sample_params(&mut rng);
            assert!(p.is_valid(), "{p:?}");
            assert_eq!(p.controls.len(), 16);
            assert_eq!(p.mask_threshold, 180);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_params(&mut RngStream::from_seed(4));
        let b = sample_params(&mut RngStream::from_seed(4));
        assert_eq!(a, b);
    }

    #[test]
    fn sample_means_center() {
        let mut rng = RngStream::from_seed(2);
        let n = 10_000;
        let (mut dx, mut alpha) = (0.0, 0.0);
        for _ in 0..n {
            let p = sample_params(&mut rng);
            dx += p.dx;
            alpha += p.alpha;
        }
        assert!((dx / n as f64).abs() < 0.5);
        assert!((alpha / n as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn rigid_identity() {
        let img = GrayImage::from_fn(512, 512, |x, y| ((x * 3 + y * 5) % 256) as u8);
        assert_eq!(apply_rigid(&img, 0.0, 0.0, 0.0), img);
    }

    #[test]
    fn rigid_translation_moves_pixel() {
        let mut img = GrayImage::blank();
        img.set(100, 100, 0);
        let out = apply_rigid(&img, 5.0, 0.0, 0.0);
        let (cx, cy) = dark_centroid(&out);
        assert!((cx - 105.0).abs() <= 0.5 && (cy - 100.0).abs() <= 0.5, "{cx},{cy}");
    }

    #[test]
    fn rbf_kernel_values() {
        let none = [ControlPoint { x: 10.0, y: 10.0, wx: 0.0, wy: 0.0 }];
        assert_eq!(rbf_displacement(&none, 40.0, (3.0, 4.0)), (0.0, 0.0));
        let one = [ControlPoint { x: 100.0, y: 100.0, wx: 8.0, wy: 0.0 }];
        assert_eq!(rbf_displacement(&one, 40.0, (100.0, 100.0)), (8.0, 0.0));
        let far = rbf_displacement(&one, 40.0, (100.0 + 3.0 * 40.0, 100.0));
        // exp(-4.5) ~ 0.0111
        assert!(far.0.hypot(far.1) < 0.12 * 8.0);
        assert!((far.0 - 8.0 * (-4.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn zero_field_is_identity() {
        let img = GrayImage::from_fn(512, 512, |x, y| ((x ^ y) % 256) as u8);
        let mut p = ImpressionParams::identity();
        p.controls = vec![ControlPoint { x: 1.0, y: 2.0, wx: 0.0, wy: 0.0 }; 16];
        assert_eq!(apply_deformation(&img, &p), img);
    }

    #[test]
    fn masks() {
        let white = GrayImage::blank();
        assert!(fingerprint_mask(&white, 180).is_empty());
        let black = GrayImage::new(512, 512, 0);
        assert_eq!(fingerprint_mask(&black, 180).count(), 512 * 512);
        let checker = GrayImage::from_fn(512, 512, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 });
        assert_eq!(fingerprint_mask(&checker, 180).count(), 512 * 512 / 2);
    }

    #[test]
    fn contrast_formula() {
        let img = GrayImage::from_pixels(3, 1, vec![100, 250, 200]).unwrap();
        let mask = BinaryMask::from_fn(3, 1, |x, _| x < 2);
        let out = adjust_contrast(&img, &mask, 1.3, 30.0);
        assert_eq!(out.pixels(), &[160, 255, 200]);
        assert_eq!(adjust_contrast(&img, &mask, 1.0, 0.0), img);
    }

    #[test]
    fn identity_pipeline() {
        let img = GrayImage::from_fn(512, 512, |x, y| ((x * 7 + y) % 256) as u8);
        assert_eq!(render_impression(&img, &ImpressionParams::identity()), img);
    }
}
