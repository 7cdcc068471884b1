//! Procedural master prints.
//!
//! A master print is grown from seeded noise by repeatedly convolving with a
//! Gabor filter steered by a zero-pole orientation field, then clipped to a
//! finger-class silhouette. Cores contribute +1/2 winding to the field and
//! deltas -1/2.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage, FRAME_SIZE, WHITE};
use crate::rng::RngStream;
use crate::types::{Finger, FingerClass, Hand};

pub const GABOR_ITERATIONS: usize = 15;
pub const MIN_RIDGE_PERIOD: f64 = 7.0;
pub const MAX_RIDGE_PERIOD: f64 = 11.0;
pub const FIELD_BLOCK: usize = 4;

const ORIENTATION_BINS: usize = 48;
/// Contrast gain applied before clipping each iterate to [-1, 1].
const RELAX_GAIN: f32 = 1.6;
/// Mean absolute change between the last two iterates that counts as converged.
const CONVERGENCE_TOL: f64 = 0.05;
/// Offset subtracted before clipping; thins ridges relative to valleys so
/// ridge endings outnumber bifurcations as in real prints.
const RIDGE_BIAS: f32 = 0.15;
const RIDGE_INK: f64 = 135.0;
const RIDGE_SWING: f64 = 100.0;

/// Elliptical finger silhouette.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Silhouette {
    pub center_x: f64,
    pub center_y: f64,
    pub half_width: f64,
    pub half_height: f64,
}

impl Silhouette {
    /// Class-conditioned default silhouette; thumbs are widest, little
    /// fingers smallest, and the ranges do not overlap between those two.
    pub fn sample(class: FingerClass, size: usize, rng: &mut RngStream) -> Silhouette {
        let (w, h) = match class.finger() {
            Finger::Thumb => ((140.0, 155.0), (175.0, 190.0)),
            Finger::Index => ((115.0, 128.0), (158.0, 172.0)),
            Finger::Middle => ((118.0, 132.0), (165.0, 180.0)),
            Finger::Ring => ((112.0, 125.0), (155.0, 170.0)),
            Finger::Little => ((95.0, 108.0), (135.0, 150.0)),
        };
        let half = size as f64 / 2.0;
        let scale = size as f64 / FRAME_SIZE as f64;
        Silhouette {
            center_x: half + rng.uniform(-6.0, 6.0) * scale,
            center_y: half + rng.uniform(-10.0, 10.0) * scale,
            half_width: rng.uniform(w.0, w.1) * scale,
            half_height: rng.uniform(h.0, h.1) * scale,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let u = (x - self.center_x) / self.half_width;
        let v = (y - self.center_y) / self.half_height;
        u * u + v * v <= 1.0
    }

    pub fn mask(&self, size: usize) -> BinaryMask {
        BinaryMask::from_fn(size, size, |x, y| self.contains(x as f64, y as f64))
    }

    fn fits(&self, size: usize) -> bool {
        let s = size as f64;
        self.center_x - self.half_width >= 1.0
            && self.center_x + self.half_width <= s - 2.0
            && self.center_y - self.half_height >= 1.0
            && self.center_y + self.half_height <= s - 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterPrintParams {
    pub cores: Vec<(f64, f64)>,
    pub deltas: Vec<(f64, f64)>,
    /// Pixels per ridge cycle.
    pub ridge_period: f64,
    /// Global orientation offset in radians.
    pub theta0: f64,
    pub shape: Silhouette,
    pub size: usize,
}

impl MasterPrintParams {
    /// Draws a pattern type (arch, loop or whorl) with class-dependent
    /// priors, then places singular points and the silhouette.
    pub fn sample(class: FingerClass, rng: &mut RngStream) -> MasterPrintParams {
        let size = FRAME_SIZE;
        let shape = Silhouette::sample(class, size, &mut rng.fork("silhouette"));
        let mut r = rng.fork("pattern");
        let (p_arch, p_whorl) = match class.finger() {
            Finger::Thumb => (0.08, 0.45),
            Finger::Index => (0.12, 0.30),
            Finger::Middle => (0.05, 0.28),
            Finger::Ring => (0.04, 0.40),
            Finger::Little => (0.02, 0.15),
        };
        let u = r.uniform(0.0, 1.0);
        let (cx, cy) = (shape.center_x, shape.center_y);
        let mut cores = Vec::new();
        let mut deltas = Vec::new();
        if u < p_arch {
            // plain arch: no singular points
        } else if u < p_arch + p_whorl {
            let core_y = cy - r.uniform(10.0, 50.0);
            let sep = r.uniform(12.0, 36.0);
            let tilt = r.uniform(-12.0, 12.0);
            cores.push((cx + tilt, core_y - sep / 2.0));
            cores.push((cx - tilt, core_y + sep / 2.0));
            let dy = r.uniform(70.0, 115.0);
            deltas.push((cx - r.uniform(85.0, 120.0), core_y + dy + r.uniform(-15.0, 15.0)));
            deltas.push((cx + r.uniform(85.0, 120.0), core_y + dy + r.uniform(-15.0, 15.0)));
        } else {
            let core = (cx + r.uniform(-30.0, 30.0), cy - r.uniform(15.0, 60.0));
            // Loops mostly open toward the little-finger side of each hand.
            let toward_left = match class.hand() {
                Hand::Left => r.chance(0.8),
                Hand::Right => r.chance(0.2),
            };
            let side = if toward_left { -1.0 } else { 1.0 };
            let delta = (core.0 + side * r.uniform(70.0, 110.0), core.1 + r.uniform(90.0, 130.0));
            cores.push(core);
            deltas.push(delta);
        }
        let clamp = |p: (f64, f64)| (p.0.clamp(0.0, size as f64 - 1.0), p.1.clamp(0.0, size as f64 - 1.0));
        MasterPrintParams {
            cores: cores.into_iter().map(clamp).collect(),
            deltas: deltas.into_iter().map(clamp).collect(),
            ridge_period: r.uniform(8.0, 10.0),
            theta0: r.uniform(-0.15, 0.15),
            shape,
            size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cores.len() > 2 || self.deltas.len() > 2 {
            return Err(Error::InvalidArgument(format!(
                "{} cores / {} deltas; at most 2 of each",
                self.cores.len(),
                self.deltas.len()
            )));
        }
        if !(MIN_RIDGE_PERIOD..=MAX_RIDGE_PERIOD).contains(&self.ridge_period) {
            return Err(Error::InvalidArgument(format!(
                "ridge period {} outside [7, 11]",
                self.ridge_period
            )));
        }
        if !self.shape.fits(self.size) {
            return Err(Error::InvalidArgument("silhouette does not fit the frame".into()));
        }
        Ok(())
    }
}

/// Ridge orientation sampled on a block grid, angles in `[0, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationField {
    pub width: usize,
    pub height: usize,
    pub block: usize,
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub angles: Vec<f64>,
    /// Per-block coherence in `[0, 1]`; 1 for analytic fields.
    pub coherence: Vec<f64>,
}

impl OrientationField {
    pub fn constant(width: usize, height: usize, block: usize, angle: f64) -> Self {
        let bx = width.div_ceil(block);
        let by = height.div_ceil(block);
        OrientationField {
            width,
            height,
            block,
            blocks_x: bx,
            blocks_y: by,
            angles: vec![reduce_pi(angle); bx * by],
            coherence: vec![1.0; bx * by],
        }
    }

    #[inline]
    fn block_index(&self, x: usize, y: usize) -> usize {
        let bx = (x / self.block).min(self.blocks_x - 1);
        let by = (y / self.block).min(self.blocks_y - 1);
        by * self.blocks_x + bx
    }

    /// Angle of the block containing pixel (x, y).
    pub fn angle_at(&self, x: usize, y: usize) -> f64 {
        self.angles[self.block_index(x, y)]
    }

    pub fn coherence_at(&self, x: usize, y: usize) -> f64 {
        self.coherence[self.block_index(x, y)]
    }

    /// Angle at pixel (x, y) interpolated in doubled-angle space.
    pub fn angle_interp(&self, x: f64, y: f64) -> f64 {
        let b = self.block as f64;
        let fx = (x / b - 0.5).clamp(0.0, (self.blocks_x - 1) as f64);
        let fy = (y / b - 0.5).clamp(0.0, (self.blocks_y - 1) as f64);
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(self.blocks_x - 1), (y0 + 1).min(self.blocks_y - 1));
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let mut c = 0.0;
        let mut s = 0.0;
        for (bx, by, w) in [
            (x0, y0, (1.0 - tx) * (1.0 - ty)),
            (x1, y0, tx * (1.0 - ty)),
            (x0, y1, (1.0 - tx) * ty),
            (x1, y1, tx * ty),
        ] {
            let a = 2.0 * self.angles[by * self.blocks_x + bx];
            c += w * a.cos();
            s += w * a.sin();
        }
        reduce_pi(0.5 * s.atan2(c))
    }
}

/// Reduces an angle into `[0, pi)`.
pub fn reduce_pi(a: f64) -> f64 {
    let r = a.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Signed smallest difference between two orientations, in `[-pi/2, pi/2)`.
pub fn orientation_diff(a: f64, b: f64) -> f64 {
    (a - b + PI / 2.0).rem_euclid(PI) - PI / 2.0
}

/// Zero-pole orientation at a point. A point landing exactly on a singular
/// point is evaluated half a pixel down and to the right.
pub fn zero_pole_orientation(params: &MasterPrintParams, x: f64, y: f64) -> f64 {
    let on_pole = params
        .cores
        .iter()
        .chain(&params.deltas)
        .any(|&(px, py)| px == x && py == y);
    let (x, y) = if on_pole { (x + 0.5, y + 0.5) } else { (x, y) };
    let mut theta = params.theta0;
    for &(cx, cy) in &params.cores {
        theta += 0.5 * (y - cy).atan2(x - cx);
    }
    for &(dx, dy) in &params.deltas {
        theta -= 0.5 * (y - dy).atan2(x - dx);
    }
    reduce_pi(theta)
}

/// Samples the zero-pole field at the centre of every `FIELD_BLOCK` block.
pub fn orientation_field(params: &MasterPrintParams, size: usize) -> OrientationField {
    orientation_field_with_block(params, size, FIELD_BLOCK)
}

pub fn orientation_field_with_block(params: &MasterPrintParams, size: usize, block: usize) -> OrientationField {
    let mut field = OrientationField::constant(size, size, block, 0.0);
    let half = block as f64 / 2.0;
    for by in 0..field.blocks_y {
        for bx in 0..field.blocks_x {
            let x = (bx * block) as f64 + half;
            let y = (by * block) as f64 + half;
            field.angles[by * field.blocks_x + bx] = zero_pole_orientation(params, x, y);
        }
    }
    field
}

/// Class silhouette mask drawn from `rng`.
pub fn shape_mask(class: FingerClass, size: usize, rng: &mut RngStream) -> BinaryMask {
    Silhouette::sample(class, size, rng).mask(size)
}

#[derive(Debug, Clone)]
pub struct MasterPrint {
    pub image: GrayImage,
    pub converged: bool,
    /// Mean absolute change of the final Gabor iteration.
    pub final_change: f64,
}

/// Even-symmetric, zero-mean Gabor kernel bank, one kernel per quantized
/// orientation, rows padded to a multiple of 8 taps.
struct GaborBank {
    radius: usize,
    row_len: usize,
    kernels: Vec<Vec<f32>>,
}

impl GaborBank {
    fn new(period: f64) -> Self {
        let sigma = 0.5 * period;
        let radius = (2.0 * sigma).ceil() as usize;
        let side = 2 * radius + 1;
        let row_len = side.div_ceil(8) * 8;
        let kernels = (0..ORIENTATION_BINS)
            .map(|b| {
                let theta = b as f64 * PI / ORIENTATION_BINS as f64;
                // Ridges run along theta; the carrier varies along the normal.
                let (nx, ny) = (-theta.sin(), theta.cos());
                let mut k = vec![0.0f64; side * side];
                for ky in 0..side {
                    for kx in 0..side {
                        let dx = kx as f64 - radius as f64;
                        let dy = ky as f64 - radius as f64;
                        let u = dx * nx + dy * ny;
                        let env = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
                        k[ky * side + kx] = env * (2.0 * PI * u / period).cos();
                    }
                }
                let mean = k.iter().sum::<f64>() / k.len() as f64;
                let norm: f64 = k.iter().map(|v| (v - mean).abs()).sum();
                let mut padded = vec![0.0f32; side * row_len];
                for ky in 0..side {
                    for kx in 0..side {
                        padded[ky * row_len + kx] = ((k[ky * side + kx] - mean) / norm) as f32;
                    }
                }
                padded
            })
            .collect();
        GaborBank {
            radius,
            row_len,
            kernels,
        }
    }
}

#[inline]
fn dot8(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0.0f32; 8];
    for (ca, cb) in a.chunks_exact(8).zip(b.chunks_exact(8)) {
        for i in 0..8 {
            acc[i] += ca[i] * cb[i];
        }
    }
    acc.iter().sum()
}

/// Grows a ridge pattern inside the silhouette. Background stays white and
/// ridges are dark.
pub fn synthesize_master(params: &MasterPrintParams, _class: FingerClass, rng: &mut RngStream) -> Result<MasterPrint> {
    params.validate()?;
    let size = params.size;
    let mask = params.shape.mask(size);
    let Some((bx0, by0, bx1, by1)) = mask.bounding_box() else {
        return Ok(MasterPrint {
            image: GrayImage::new(size, size, WHITE),
            converged: true,
            final_change: 0.0,
        });
    };
    let bank = GaborBank::new(params.ridge_period);
    let r = bank.radius;
    // Working region: silhouette bounding box plus a filter radius.
    let x0 = bx0.saturating_sub(r);
    let y0 = by0.saturating_sub(r);
    let x1 = (bx1 + r + 1).min(size);
    let y1 = (by1 + r + 1).min(size);
    let (ww, wh) = (x1 - x0, y1 - y0);

    let field = orientation_field(params, size);
    let bins: Vec<u8> = (0..ww * wh)
        .map(|i| {
            let (x, y) = (x0 + i % ww, y0 + i / ww);
            let a = field.angle_interp(x as f64 + 0.5, y as f64 + 0.5);
            ((a / PI * ORIENTATION_BINS as f64).round() as usize % ORIENTATION_BINS) as u8
        })
        .collect();

    let mut noise = rng.fork("gabor-noise");
    let mut state: Vec<f32> = (0..ww * wh).map(|_| noise.uniform(-1.0, 1.0) as f32).collect();

    // Zero-padded copy of the state; padded rows are wide enough for the
    // 8-aligned kernel rows.
    let pw = ww + 2 * r + bank.row_len;
    let ph = wh + 2 * r;
    let mut padded = vec![0.0f32; pw * ph];
    let mut next = vec![0.0f32; ww * wh];
    let side = 2 * r + 1;
    let mut final_change = f64::INFINITY;

    for _ in 0..GABOR_ITERATIONS {
        for y in 0..wh {
            let dst = (y + r) * pw + r;
            padded[dst..dst + ww].copy_from_slice(&state[y * ww..(y + 1) * ww]);
        }
        for y in 0..wh {
            for x in 0..ww {
                let k = &bank.kernels[bins[y * ww + x] as usize];
                let mut acc = 0.0f32;
                for ky in 0..side {
                    let row = (y + ky) * pw + x;
                    acc += dot8(&k[ky * bank.row_len..(ky + 1) * bank.row_len], &padded[row..row + bank.row_len]);
                }
                next[y * ww + x] = acc;
            }
        }
        let mut sq = 0.0f64;
        let mut n = 0usize;
        for y in 0..wh {
            for x in 0..ww {
                if mask.get(x0 + x, y0 + y) {
                    let v = next[y * ww + x] as f64;
                    sq += v * v;
                    n += 1;
                }
            }
        }
        let rms = (sq / n.max(1) as f64).sqrt().max(1e-12) as f32;
            let mut change = 0.0f64;
        for (s, &v) in state.iter_mut().zip(&next) {
            let nv = (v / rms * RELAX_GAIN - RIDGE_BIAS).clamp(-1.0, 1.0);
            change += (nv - *s).abs() as f64;
            *s = nv;
        }
        final_change = change / state.len() as f64;
    }

    let mut image = GrayImage::new(size, size, WHITE);
    for y in 0..wh {
        for x in 0..ww {
            let (gx, gy) = (x0 + x, y0 + y);
            if mask.get(gx, gy) {
                let v = state[y * ww + x] as f64;
                image.set(gx, gy, (RIDGE_INK - RIDGE_SWING * v).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    let converged = final_change < CONVERGENCE_TOL;
    if !converged {
        log::warn!("master print did not converge (mean change {final_change:.4})");
    }
    Ok(MasterPrint {
        image,
        converged,
        final_change,
    })
}
