//! 8-bit grayscale rasters, binary masks and the small set of morphology
//! helpers shared by the generation and extraction stages.

use std::collections::VecDeque;
use std::path::Path;

use crate::error::{Error, Result};

/// Side length of every pipeline-facing image.
pub const FRAME_SIZE: usize = 512;

pub const WHITE: u8 = 255;

#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GrayImage({}x{})", self.width, self.height)
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, fill: u8) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    /// A blank white 512x512 frame.
    pub fn blank() -> Self {
        Self::new(FRAME_SIZE, FRAME_SIZE, WHITE)
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// Fills pixels in row-major order.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_frame(&self) -> bool {
        self.width == FRAME_SIZE && self.height == FRAME_SIZE
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    /// Bilinear sample at a real-valued position; anything outside the
    /// frame reads as `fill`.
    pub fn sample_bilinear(&self, x: f64, y: f64, fill: u8) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (xi, yi) = (x0 as i64, y0 as i64);
        let at = |xx: i64, yy: i64| -> f64 {
            if xx < 0 || yy < 0 || xx >= self.width as i64 || yy >= self.height as i64 {
                fill as f64
            } else {
                self.pixels[yy as usize * self.width + xx as usize] as f64
            }
        };
        if fx == 0.0 && fy == 0.0 {
            return at(xi, yi);
        }
        let top = at(xi, yi) * (1.0 - fx) + at(xi + 1, yi) * fx;
        let bottom = at(xi, yi + 1) * (1.0 - fx) + at(xi + 1, yi + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn mean_abs_diff(&self, other: &GrayImage) -> f64 {
        assert_eq!(self.pixels.len(), other.pixels.len());
        let total: u64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| (a as i32 - b as i32).unsigned_abs() as u64)
            .sum();
        total as f64 / self.pixels.len().max(1) as f64
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let luma = img.into_luma8();
        let (w, h) = luma.dimensions();
        GrayImage::from_pixels(w as usize, h as usize, luma.into_raw())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        image::save_buffer(
            path,
            &self.pixels,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Row-major binary raster.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BinaryMask({}x{}, {} set)",
            self.width,
            self.height,
            self.count()
        )
    }
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-range coordinates read as unset.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.bits.len().max(1) as f64
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)` of the set pixels.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    bb = Some(match bb {
                        None => (x, y, x, y),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                    });
                }
            }
        }
        bb
    }

    pub fn touches_border(&self) -> bool {
        let (w, h) = (self.width, self.height);
        (0..w).any(|x| self.get(x, 0) || self.get(x, h - 1))
            || (0..h).any(|y| self.get(0, y) || self.get(w - 1, y))
    }

    /// Chamfer (3-4) distance of every pixel to the nearest unset pixel, in
    /// pixel units. Pixels outside the frame count as unset.
    pub fn distance_to_background(&self) -> Vec<f32> {
        let (w, h) = (self.width, self.height);
        const INF: u32 = u32::MAX / 4;
        let mut d: Vec<u32> = self.bits.iter().map(|&b| if b { INF } else { 0 }).collect();
        let at = |d: &Vec<u32>, x: i64, y: i64| -> u32 {
            if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                0
            } else {
                d[y as usize * w + x as usize]
            }
        };
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let i = y as usize * w + x as usize;
                if d[i] == 0 {
                    continue;
                }
                let v = d[i]
                    .min(at(&d, x - 1, y) + 3)
                    .min(at(&d, x, y - 1) + 3)
                    .min(at(&d, x - 1, y - 1) + 4)
                    .min(at(&d, x + 1, y - 1) + 4);
                d[i] = v;
            }
        }
        for y in (0..h as i64).rev() {
            for x in (0..w as i64).rev() {
                let i = y as usize * w + x as usize;
                if d[i] == 0 {
                    continue;
                }
                let v = d[i]
                    .min(at(&d, x + 1, y) + 3)
                    .min(at(&d, x, y + 1) + 3)
                    .min(at(&d, x + 1, y + 1) + 4)
                    .min(at(&d, x - 1, y + 1) + 4);
                d[i] = v;
            }
        }
        d.into_iter().map(|v| v as f32 / 3.0).collect()
    }

    pub fn erode(&self, radius: f32) -> BinaryMask {
        let dist = self.distance_to_background();
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: dist.iter().map(|&v| v > radius).collect(),
        }
    }

    pub fn dilate(&self, radius: f32) -> BinaryMask {
        self.invert().erode(radius).invert()
    }

    pub fn invert(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    /// 8-connected components; returns per-pixel labels (0 = unset) and
    /// the component sizes indexed by `label - 1`.
    pub fn components(&self) -> (Vec<u32>, Vec<usize>) {
        let (w, h) = (self.width, self.height);
        let mut labels = vec![0u32; w * h];
        let mut sizes = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..w * h {
            if !self.bits[start] || labels[start] != 0 {
                continue;
            }
            let label = sizes.len() as u32 + 1;
            labels[start] = label;
            queue.push_back(start);
            let mut size = 0;
            while let Some(i) = queue.pop_front() {
                size += 1;
                let (x, y) = ((i % w) as i64, (i / w) as i64);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let j = ny as usize * w + nx as usize;
                        if self.bits[j] && labels[j] == 0 {
                            labels[j] = label;
                            queue.push_back(j);
                        }
                    }
                }
            }
            sizes.push(size);
        }
        (labels, sizes)
    }

    /// Drops 8-connected components smaller than `min_size` pixels.
    pub fn remove_small_components(&self, min_size: usize) -> BinaryMask {
        let (labels, sizes) = self.components();
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: labels
                .iter()
                .map(|&l| l != 0 && sizes[l as usize - 1] >= min_size)
                .collect(),
        }
    }

    /// Keeps only the largest 8-connected component.
    pub fn largest_component(&self) -> BinaryMask {
        let (labels, sizes) = self.components();
        let Some(best) = sizes.iter().enumerate().max_by_key(|&(i, s)| (*s, usize::MAX - i)) else {
            return self.clone();
        };
        let keep = best.0 as u32 + 1;
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: labels.iter().map(|&l| l == keep).collect(),
        }
    }

    /// Sets every unset region that does not reach the frame border.
    pub fn fill_holes(&self) -> BinaryMask {
        let (w, h) = (self.width, self.height);
        let mut outside = vec![false; w * h];
        let mut queue = VecDeque::new();
        let seed = |i: usize, q: &mut VecDeque<usize>, o: &mut Vec<bool>| {
            if !self.bits[i] && !o[i] {
                o[i] = true;
                q.push_back(i);
            }
        };
        for x in 0..w {
            seed(x, &mut queue, &mut outside);
            seed((h - 1) * w + x, &mut queue, &mut outside);
        }
        for y in 0..h {
            seed(y * w, &mut queue, &mut outside);
            seed(y * w + w - 1, &mut queue, &mut outside);
        }
        // 4-connected background flood so diagonal ridges still enclose holes.
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if !self.bits[j] && !outside[j] {
                    outside[j] = true;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        BinaryMask {
            width: w,
            height: h,
            bits: outside.iter().map(|&o| !o).collect(),
        }
    }
}

/// Summed-area table over `i64` values with clamped window queries.
pub(crate) struct Integral {
    width: usize,
    height: usize,
    sums: Vec<i64>,
}

impl Integral {
    pub fn new(width: usize, height: usize, values: impl Fn(usize) -> i64) -> Self {
        let stride = width + 1;
        let mut sums = vec![0i64; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0i64;
            for x in 0..width {
                row += values(y * width + x);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Integral {
            width,
            height,
            sums,
        }
    }

    /// Sum and pixel count of the window of half-size `r` centred at (x, y),
    /// clipped to the frame.
    #[inline]
    pub fn window(&self, x: usize, y: usize, r: usize) -> (i64, i64) {
        let x0 = x.saturating_sub(r);
        let y0 = y.saturating_sub(r);
        let x1 = (x + r + 1).min(self.width);
        let y1 = (y + r + 1).min(self.height);
        let s = self.width + 1;
        let sum = self.sums[y1 * s + x1] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0]
            + self.sums[y0 * s + x0];
        (sum, ((x1 - x0) * (y1 - y0)) as i64)
    }
}
