use std::f64::consts::PI;

use crate::masterprint::{reduce_pi, OrientationField};
use crate::raster::{BinaryMask, GrayImage, Integral};

/// Foreground needs at least this local standard deviation.
const SEGMENT_STD: i64 = 20;
const SEGMENT_RADIUS: usize = 8;
const MEAN_RADIUS: usize = 8;
const ORIENT_BLOCK: usize = 8;
/// Half-size of the tensor window used for the smoothed orientation.
const ORIENT_RADIUS: usize = 16;
/// Half-size of the 16x16-ish window used for coherence.
const COHERENCE_RADIUS: usize = 8;
const MIN_BLOB: usize = 25;
const ALONG: [i64; 7] = [1, 6, 15, 20, 15, 6, 1];
const ACROSS: [i64; 3] = [1, 2, 1];

/// Binary ridge map plus the foreground mask and orientation estimate it
/// was derived with.
#[derive(Debug, Clone)]
pub struct RidgeMap {
    pub ridges: BinaryMask,
    pub mask: BinaryMask,
    pub orientation: OrientationField,
}

/// Fingerprint foreground: high local variance, largest blob, holes filled,
/// pulled in by the variance window half-size.
pub fn segment(img: &GrayImage) -> BinaryMask {
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let s1 = Integral::new(w, h, |i| px[i] as i64);
    let s2 = Integral::new(w, h, |i| (px[i] as i64) * (px[i] as i64));
    let raw = BinaryMask::from_fn(w, h, |x, y| {
        let (a, n) = s1.window(x, y, SEGMENT_RADIUS);
        let (b, _) = s2.window(x, y, SEGMENT_RADIUS);
        // n^2 var = n*sum(x^2) - sum(x)^2
        n * b - a * a > SEGMENT_STD * SEGMENT_STD * n * n
    });
    if raw.is_empty() {
        return raw;
    }
    raw.largest_component()
        .fill_holes()
        .erode(SEGMENT_RADIUS as f32 - 2.0)
}

fn sobel(img: &GrayImage) -> (Vec<i32>, Vec<i32>) {
    let (w, h) = (img.width(), img.height());
    let at = |x: i64, y: i64| -> i32 {
        let xx = x.clamp(0, w as i64 - 1) as usize;
        let yy = y.clamp(0, h as i64 - 1) as usize;
        img.get(xx, yy) as i32
    };
    let mut gx = vec![0i32; w * h];
    let mut gy = vec![0i32; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            gx[i] = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
            gy[i] = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
        }
    }
    (gx, gy)
}

/// Gradient-tensor orientation on an 8-px block grid. Angles are ridge
/// directions; coherence comes from a ~16x16 window.
pub fn estimate_orientation(img: &GrayImage) -> OrientationField {
    let (w, h) = (img.width(), img.height());
    let (gx, gy) = sobel(img);
    let sxx = Integral::new(w, h, |i| (gx[i] as i64) * (gx[i] as i64));
    let syy = Integral::new(w, h, |i| (gy[i] as i64) * (gy[i] as i64));
    let sxy = Integral::new(w, h, |i| (gx[i] as i64) * (gy[i] as i64));
    let mut field = OrientationField::constant(w, h, ORIENT_BLOCK, 0.0);
    for by in 0..field.blocks_y {
        for bx in 0..field.blocks_x {
            let cx = (bx * ORIENT_BLOCK + ORIENT_BLOCK / 2).min(w - 1);
            let cy = (by * ORIENT_BLOCK + ORIENT_BLOCK / 2).min(h - 1);
            let tensor = |r: usize| {
                let xx = sxx.window(cx, cy, r).0 as f64;
                let yy = syy.window(cx, cy, r).0 as f64;
                let xy = sxy.window(cx, cy, r).0 as f64;
                (xx, yy, xy)
            };
            let (xx, yy, xy) = tensor(ORIENT_RADIUS);
            let grad_dir = 0.5 * (2.0 * xy).atan2(xx - yy);
            let i = by * field.blocks_x + bx;
            field.angles[i] = reduce_pi(grad_dir + PI / 2.0);
            let (xx, yy, xy) = tensor(COHERENCE_RADIUS);
            let energy = xx + yy;
            field.coherence[i] = if energy > 0.0 {
                (((xx - yy).powi(2) + 4.0 * xy * xy).sqrt() / energy).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
    field
}

/// Ridge pixels (dark relative to the local mean after smoothing along the
/// ridge flow), confined to the segmented foreground.
///
/// Everything up to the sign test is integer arithmetic on `x * n - sum`,
/// so a uniform brightness offset leaves the map unchanged.
pub fn enhance_and_binarize(img: &GrayImage) -> RidgeMap {
    let (w, h) = (img.width(), img.height());
    let mask = segment(img);
    let orientation = estimate_orientation(img);
    if mask.is_empty() {
        return RidgeMap {
            ridges: BinaryMask::new(w, h),
            mask,
            orientation,
        };
    }
    let px = img.pixels();
    let sums = Integral::new(w, h, |i| px[i] as i64);
    let mut centred = vec![0i64; w * h];
    for y in 0..h {
        for x in 0..w {
            let (s, n) = sums.window(x, y, MEAN_RADIUS);
            centred[y * w + x] = px[y * w + x] as i64 * n - s;
        }
    }
    let at = |x: i64, y: i64| -> i64 {
        let xx = x.clamp(0, w as i64 - 1) as usize;
        let yy = y.clamp(0, h as i64 - 1) as usize;
        centred[yy * w + xx]
    };
    let mut ridges = BinaryMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let theta = orientation.angle_interp(x as f64 + 0.5, y as f64 + 0.5);
            let (s, c) = theta.sin_cos();
            let mut acc = 0i64;
            for (k, &wk) in ALONG.iter().enumerate() {
                let t = k as f64 - 3.0;
                for (j, &wj) in ACROSS.iter().enumerate() {
                    let u = j as f64 - 1.0;
                    let sx = (x as f64 + t * c - u * s).round() as i64;
                    let sy = (y as f64 + t * s + u * c).round() as i64;
                    acc += wk * wj * at(sx, sy);
                }
            }
            if acc < 0 {
                ridges.set(x, y, true);
            }
        }
    }
    // Drop specks and plug pinholes.
    let ridges = ridges.remove_small_components(MIN_BLOB);
    let valleys = BinaryMask::from_fn(w, h, |x, y| mask.get(x, y) && !ridges.get(x, y));
    let kept_valleys = valleys.remove_small_components(MIN_BLOB);
    let ridges = BinaryMask::from_fn(w, h, |x, y| mask.get(x, y) && !kept_valleys.get(x, y));
    RidgeMap {
        ridges,
        mask,
        orientation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stripes(period: f64, offset: f64) -> GrayImage {
        GrayImage::from_fn(512, 512, |x, _| {
            let v = 128.0 + 90.0 * (2.0 * PI * x as f64 / period).cos() + offset;
            v.round() as u8
        })
    }

    #[test]
    fn blank_image_gives_empty_map() {
        let map = enhance_and_binarize(&GrayImage::blank());
        assert!(map.ridges.is_empty());
        assert!(map.mask.is_empty());
    }

    #[test]
    fn stripes_binarize_to_half() {
        let map = enhance_and_binarize(&stripes(9.0, 0.0));
        let frac = map.ridges.count() as f64 / map.mask.count() as f64;
        assert!((frac - 0.5).abs() <= 0.1, "{frac}");
        // Alternating bands along a row in the middle.
        let row: Vec<bool> = (200..300).map(|x| map.ridges.get(x, 256)).collect();
        let flips = row.windows(2).filter(|p| p[0] != p[1]).count();
        assert!((20..=24).contains(&flips), "{flips}");
    }

    #[test]
    fn brightness_shift_invariance() {
        let a = enhance_and_binarize(&stripes(9.0, 0.0));
        let b = enhance_and_binarize(&stripes(9.0, 20.0));
        assert_eq!(a.ridges, b.ridges);
    }

    #[test]
    fn stripe_orientation_is_vertical() {
        let f = estimate_orientation(&stripes(9.0, 0.0));
        let a = f.angle_at(256, 256);
        assert!((a - PI / 2.0).abs() < 1e-6, "{a}");
        assert!(f.coherence_at(256, 256) > 0.9);
    }
}
