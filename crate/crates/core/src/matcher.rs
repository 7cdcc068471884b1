//! Minutiae matching: Hough-style rigid alignment followed by greedy
//! one-to-one pairing.
//!
//! Scores are `100 * pairs^2 / (|a| * |b|)`, so a perfect self-match is 100.
//! The scale is specific to this matcher and is not calibrated to any
//! commercial SDK.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::minutiae::{Minutia, MinutiaSet};

/// Largest relative rotation searched. Two impressions of one master can
/// each be rotated by up to 30 degrees, so their relative rotation reaches 60.
pub const MAX_ROTATION_DEG: f64 = 60.0;
pub const ANGLE_BIN_DEG: f64 = 4.0;
/// A minutia pair votes for every rotation bin within this of its own
/// direction difference.
const ANGLE_SPREAD_DEG: f64 = 12.0;
pub const MAX_SHIFT: f64 = 64.0;
pub const SHIFT_BIN: f64 = 8.0;
/// Pairing tolerances after alignment.
pub const PAIR_DISTANCE: f64 = 12.0;
pub const PAIR_ANGLE_DEG: f64 = 20.0;
/// Accumulator peaks tried before picking the best pairing.
const CANDIDATE_PEAKS: usize = 3;
const MIN_ALIGN_MINUTIAE: usize = 3;

const ANGLE_BINS: usize = (2.0 * MAX_ROTATION_DEG / ANGLE_BIN_DEG) as usize + 1;
const SHIFT_BINS: usize = (2.0 * MAX_SHIFT / SHIFT_BIN) as usize + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchScore {
    pub value: f64,
    pub supporting_pairs: usize,
}

impl MatchScore {
    pub const ZERO: MatchScore = MatchScore {
        value: 0.0,
        supporting_pairs: 0,
    };
}

/// Rotation by `dtheta` about the frame centre, then translation by
/// `(dx, dy)`. Maps coordinates of the first set into the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        dx: 0.0,
        dy: 0.0,
        dtheta: 0.0,
    };

    pub fn apply(&self, m: &Minutia, cx: f64, cy: f64) -> Minutia {
        let (s, c) = self.dtheta.sin_cos();
        let (ux, uy) = (m.x - cx, m.y - cy);
        Minutia {
            x: c * ux - s * uy + cx + self.dx,
            y: s * ux + c * uy + cy + self.dy,
            angle: (m.angle + self.dtheta).rem_euclid(2.0 * PI),
            ..*m
        }
    }

    pub fn apply_set(&self, set: &MinutiaSet) -> MinutiaSet {
        let (cx, cy) = centre(set);
        MinutiaSet {
            width: set.width,
            height: set.height,
            minutiae: set.minutiae.iter().map(|m| self.apply(m, cx, cy)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub transform: RigidTransform,
    /// Smoothed vote count at the chosen peak; 0 means no evidence.
    pub confidence: f64,
}

fn centre(set: &MinutiaSet) -> (f64, f64) {
    (set.width as f64 / 2.0, set.height as f64 / 2.0)
}

/// Signed difference `b - a` wrapped to `(-pi, pi]`.
fn angle_delta(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

fn angle_bin_centre(k: usize) -> f64 {
    (k as f64 * ANGLE_BIN_DEG - MAX_ROTATION_DEG).to_radians()
}

fn shift_bin_centre(k: usize) -> f64 {
    k as f64 * SHIFT_BIN - MAX_SHIFT
}

struct Accumulator {
    votes: Vec<u32>,
}

impl Accumulator {
    fn idx(a: usize, x: usize, y: usize) -> usize {
        (a * SHIFT_BINS + y) * SHIFT_BINS + x
    }

    /// 3x3x3 box sum, computed separably.
    fn smoothed(&self) -> Vec<u32> {
        let mut cur = self.votes.clone();
        let mut tmp = vec![0u32; cur.len()];
        let dims = [ANGLE_BINS, SHIFT_BINS, SHIFT_BINS];
        for axis in 0..3 {
            for a in 0..ANGLE_BINS {
                for y in 0..SHIFT_BINS {
                    for x in 0..SHIFT_BINS {
                        let c = [a, y, x][axis];
                        let mut s = cur[Self::idx(a, x, y)];
                        let at = |v: usize| match axis {
                            0 => Self::idx(v, x, y),
                            1 => Self::idx(a, x, v),
                            _ => Self::idx(a, v, y),
                        };
                        if c > 0 {
                            s += cur[at(c - 1)];
                        }
                        if c + 1 < dims[axis] {
                            s += cur[at(c + 1)];
                        }
                        tmp[Self::idx(a, x, y)] = s;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut tmp);
        }
        cur
    }
}

fn vote(a: &MinutiaSet, b: &MinutiaSet) -> Accumulator {
    let (cx, cy) = centre(a);
    let mut acc = Accumulator {
        votes: vec![0; ANGLE_BINS * SHIFT_BINS * SHIFT_BINS],
    };
    let spread = ANGLE_SPREAD_DEG.to_radians();
    let lo = -MAX_ROTATION_DEG.to_radians();
    let bin = ANGLE_BIN_DEG.to_radians();
    // Rotation tables for every bin centre.
    let rot: Vec<(f64, f64)> = (0..ANGLE_BINS).map(|k| angle_bin_centre(k).sin_cos()).collect();
    for ma in &a.minutiae {
        let (ux, uy) = (ma.x - cx, ma.y - cy);
        for mb in &b.minutiae {
            if ma.kind != mb.kind {
                continue;
            }
            let d = angle_delta(ma.angle, mb.angle);
            let first = (((d - spread - lo) / bin).ceil().max(0.0)) as usize;
            let last = ((d + spread - lo) / bin).floor();
            if last < 0.0 {
                continue;
            }
            let last = (last as usize).min(ANGLE_BINS - 1);
            for (k, &(s, c)) in rot.iter().enumerate().take(last + 1).skip(first) {
                let tx = mb.x - (c * ux - s * uy + cx);
                let ty = mb.y - (s * ux + c * uy + cy);
                let bx = ((tx + MAX_SHIFT) / SHIFT_BIN).round();
                let by = ((ty + MAX_SHIFT) / SHIFT_BIN).round();
                if bx < 0.0 || by < 0.0 || bx >= SHIFT_BINS as f64 || by >= SHIFT_BINS as f64 {
                    continue;
                }
                acc.votes[Accumulator::idx(k, bx as usize, by as usize)] += 1;
            }
        }
    }
    acc
}

/// Up to `n` accumulator peaks, each at least two cells from the others
/// along some axis. Ties resolve to the lowest index.
fn peaks(smoothed: &[u32], n: usize) -> Vec<(usize, u32)> {
    let coords = |i: usize| {
        let x = i % SHIFT_BINS;
        let y = (i / SHIFT_BINS) % SHIFT_BINS;
        let a = i / (SHIFT_BINS * SHIFT_BINS);
        (a, y, x)
    };
    let mut out: Vec<(usize, u32)> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, u32)> = None;
        for (i, &v) in smoothed.iter().enumerate() {
            if v == 0 || best.is_some_and(|(_, bv)| v <= bv) {
                continue;
            }
            let (a, y, x) = coords(i);
            let near = out.iter().any(|&(j, _)| {
                let (ja, jy, jx) = coords(j);
                a.abs_diff(ja) <= 1 && y.abs_diff(jy) <= 1 && x.abs_diff(jx) <= 1
            });
            if !near {
                best = Some((i, v));
            }
        }
        match best {
            Some(p) => out.push(p),
            None => break,
        }
    }
    out
}

fn cell_transform(i: usize) -> RigidTransform {
    let x = i % SHIFT_BINS;
    let y = (i / SHIFT_BINS) % SHIFT_BINS;
    let a = i / (SHIFT_BINS * SHIFT_BINS);
    RigidTransform {
        dx: shift_bin_centre(x),
        dy: shift_bin_centre(y),
        dtheta: angle_bin_centre(a),
    }
}

/// Best rigid transform by minutia-pair voting; identity with zero
/// confidence when either set has fewer than three minutiae.
pub fn align(a: &MinutiaSet, b: &MinutiaSet) -> Alignment {
    match candidates(a, b).first() {
        Some(&(t, votes)) => Alignment {
            transform: t,
            confidence: votes as f64,
        },
        None => Alignment {
            transform: RigidTransform::IDENTITY,
            confidence: 0.0,
        },
    }
}

fn candidates(a: &MinutiaSet, b: &MinutiaSet) -> Vec<(RigidTransform, u32)> {
    if a.len() < MIN_ALIGN_MINUTIAE || b.len() < MIN_ALIGN_MINUTIAE {
        return Vec::new();
    }
    let smoothed = vote(a, b).smoothed();
    peaks(&smoothed, CANDIDATE_PEAKS)
        .into_iter()
        .map(|(i, v)| (cell_transform(i), v))
        .collect()
}

/// Greedy one-to-one pairing of transformed `a` against `b`, closest first.
fn pair_up(a: &[Minutia], b: &[Minutia]) -> Vec<(usize, usize)> {
    let max_d2 = PAIR_DISTANCE * PAIR_DISTANCE;
    let max_da = PAIR_ANGLE_DEG.to_radians();
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, ma) in a.iter().enumerate() {
        for (j, mb) in b.iter().enumerate() {
            if ma.kind != mb.kind {
                continue;
            }
            let d2 = (ma.x - mb.x).powi(2) + (ma.y - mb.y).powi(2);
            if d2 <= max_d2 && angle_delta(ma.angle, mb.angle).abs() <= max_da {
                cand.push((d2, i, j));
            }
        }
    }
    cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in cand {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

/// Least-squares rotation about the frame centre plus translation taking
/// the paired points of `a` onto `b`.
fn refine(a: &[Minutia], b: &[Minutia], pairs: &[(usize, usize)], cx: f64, cy: f64) -> Option<RigidTransform> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let (mut ax, mut ay, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0);
    for &(i, j) in pairs {
        ax += a[i].x - cx;
        ay += a[i].y - cy;
        bx += b[j].x - cx;
        by += b[j].y - cy;
    }
    let (ax, ay, bx, by) = (ax / n, ay / n, bx / n, by / n);
    let (mut dot, mut cross) = (0.0, 0.0);
    for &(i, j) in pairs {
        let (px, py) = (a[i].x - cx - ax, a[i].y - cy - ay);
        let (qx, qy) = (b[j].x - cx - bx, b[j].y - cy - by);
        dot += px * qx + py * qy;
        cross += px * qy - py * qx;
    }
    let theta = cross.atan2(dot);
    let (s, c) = theta.sin_cos();
    Some(RigidTransform {
        dx: bx - (c * ax - s * ay),
        dy: by - (s * ax + c * ay),
        dtheta: theta,
    })
}

/// Total order on sets used to make scoring independent of argument order.
fn canonical_cmp(a: &MinutiaSet, b: &MinutiaSet) -> Ordering {
    let key = |m: &Minutia| (m.x.to_bits(), m.y.to_bits(), m.angle.to_bits(), m.kind as u8);
    a.len()
        .cmp(&b.len())
        .then_with(|| a.minutiae.iter().map(key).cmp(b.minutiae.iter().map(key)))
}

fn count_pairs(a: &MinutiaSet, b: &MinutiaSet) -> usize {
    let (cx, cy) = centre(a);
    let mut best = 0;
    for (t, _) in candidates(a, b) {
        let moved: Vec<Minutia> = a.minutiae.iter().map(|m| t.apply(m, cx, cy)).collect();
        let mut pairs = pair_up(&moved, &b.minutiae);
        if let Some(r) = refine(&a.minutiae, &b.minutiae, &pairs, cx, cy) {
            let moved: Vec<Minutia> = a.minutiae.iter().map(|m| r.apply(m, cx, cy)).collect();
            let again = pair_up(&moved, &b.minutiae);
            if again.len() > pairs.len() {
                pairs = again;
            }
        }
        best = best.max(pairs.len());
    }
    best
}

/// Similarity of two minutiae sets; exactly symmetric in its arguments.
pub fn match_minutiae(a: &MinutiaSet, b: &MinutiaSet) -> MatchScore {
    if a.is_empty() || b.is_empty() {
        return MatchScore::ZERO;
    }
    let (first, second) = match canonical_cmp(a, b) {
        Ordering::Greater => (b, a),
        _ => (a, b),
    };
    let pairs = if first == second {
        first.len()
    } else {
        count_pairs(first, second)
    };
    let p = pairs as f64;
    MatchScore {
        value: 100.0 * p * p / (a.len() as f64 * b.len() as f64),
        supporting_pairs: pairs,
    }
}
