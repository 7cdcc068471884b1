use std::f64::consts::PI;

use crate::masterprint::OrientationField;
use crate::raster::BinaryMask;

use super::thin::{ring, Skeleton};
use super::{Minutia, MinutiaKind, MinutiaSet};

/// Minutiae closer than this to the foreground edge are discarded.
pub const BORDER_MARGIN: f32 = 8.0;
/// Two minutiae closer than this are treated as a break/spur/bridge artifact.
const MIN_SEPARATION: f64 = 7.0;
/// Two ridge endings facing each other across a gap shorter than this are a
/// broken ridge.
const BREAK_DISTANCE: f64 = 16.0;
/// How far each ending may point away from the other and still face it.
const BREAK_AIM: f64 = PI / 4.0;
/// A ridge ending aimed at the foreground edge this close is a ridge cut
/// off by the edge rather than a true ending.
const EDGE_REACH: f64 = 20.0;
/// Ridge length followed to estimate a minutia direction.
const TRACE_STEPS: usize = 10;
/// A ridge shorter than this ending in another minutia is an artifact.
const SHORT_RIDGE: usize = 8;

/// `1/2 * sum |v_i - v_{i+1}|` over the closed 8-neighbour ring.
pub fn crossing_number(skel: &BinaryMask, x: usize, y: usize) -> u8 {
    let p = ring(skel, x, y);
    let transitions = (0..8).filter(|&i| p[i] != p[(i + 1) % 8]).count();
    (transitions / 2) as u8
}

const OFFSETS: [(i64, i64); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

struct Trace {
    end: (i64, i64),
    steps: usize,
    /// Stopped on another ending or a junction before `TRACE_STEPS`.
    hit_minutia: bool,
}

/// Walks along the skeleton from `start`, never revisiting `from` or the
/// pixels in `blocked`.
fn trace(skel: &BinaryMask, from: (i64, i64), start: (i64, i64), blocked: &[(i64, i64)]) -> Trace {
    let mut visited: Vec<(i64, i64)> = vec![from, start];
    visited.extend_from_slice(blocked);
    let mut cur = start;
    let mut steps = 1;
    while steps < TRACE_STEPS {
        let next: Vec<(i64, i64)> = OFFSETS
            .iter()
            .map(|&(dx, dy)| (cur.0 + dx, cur.1 + dy))
            .filter(|&(nx, ny)| skel.get_signed(nx, ny) && !visited.contains(&(nx, ny)))
            .collect();
        // Skip diagonal steps that are also reachable through a 4-neighbour.
        let next: Vec<(i64, i64)> = next
            .iter()
            .copied()
            .filter(|&(nx, ny)| {
                let diagonal = nx != cur.0 && ny != cur.1;
                !diagonal
                    || !next.iter().any(|&(ox, oy)| {
                        (ox != cur.0) ^ (oy != cur.1) && (ox - nx).abs() + (oy - ny).abs() == 1
                    })
            })
            .collect();
        match next.len() {
            0 => {
                return Trace { end: cur, steps, hit_minutia: true };
            }
            1 => {
                cur = next[0];
                visited.push(cur);
                steps += 1;
            }
            _ => {
                return Trace { end: cur, steps, hit_minutia: true };
            }
        }
    }
    Trace { end: cur, steps, hit_minutia: false }
}

/// Starting pixel of each ridge branch leaving (x, y): one per run of set
/// pixels in the neighbour ring, preferring the 4-neighbour.
fn branch_starts(skel: &BinaryMask, x: usize, y: usize) -> Vec<(i64, i64)> {
    let p = ring(skel, x, y);
    let Some(first_gap) = (0..8).find(|&i| !p[i]) else {
        return Vec::new();
    };
    let mut starts = Vec::new();
    let mut run: Vec<usize> = Vec::new();
    for k in 1..=8 {
        let i = (first_gap + k) % 8;
        if p[i] {
            run.push(i);
        } else if !run.is_empty() {
            let pick = run.iter().copied().find(|&j| j % 2 == 0).unwrap_or(run[0]);
            starts.push((x as i64 + OFFSETS[pick].0, y as i64 + OFFSETS[pick].1));
            run.clear();
        }
    }
    starts
}

fn direction(from: (i64, i64), to: (i64, i64)) -> f64 {
    ((to.1 - from.1) as f64).atan2((to.0 - from.0) as f64)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// True when a ray from `p` along `angle` leaves the foreground within
/// [`EDGE_REACH`].
fn aims_off_edge(mask: &BinaryMask, p: (i64, i64), angle: f64) -> bool {
    let (s, c) = angle.sin_cos();
    (1..=EDGE_REACH as i64).any(|k| {
        let x = (p.0 as f64 + k as f64 * c).round() as i64;
        let y = (p.1 as f64 + k as f64 * s).round() as i64;
        !mask.get_signed(x, y)
    })
}

/// Crossing-number minutiae with border, spur, island and break cleanup.
/// Reliability is the local orientation coherence.
pub fn extract_minutiae(skel: &Skeleton, orientation: &OrientationField) -> MinutiaSet {
    let bits = &skel.bits;
    let (w, h) = (bits.width(), bits.height());
    let inner = skel.mask.distance_to_background();
    let mut found: Vec<(Minutia, bool)> = Vec::new();
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            if !bits.get(x, y) || inner[y * w + x] <= BORDER_MARGIN {
                continue;
            }
            let p = (x as i64, y as i64);
            let (kind, angle, artifact) = match crossing_number(bits, x, y) {
                1 => {
                    let starts = branch_starts(bits, x, y);
                    let t = trace(bits, p, starts[0], &[]);
                    let artifact = t.hit_minutia && t.steps < SHORT_RIDGE;
                    (MinutiaKind::RidgeEnding, direction(t.end, p), artifact)
                }
                3 => {
                    let starts = branch_starts(bits, x, y);
                    if starts.len() != 3 {
                        continue;
                    }
                    let traces: Vec<Trace> = (0..3)
                        .map(|i| {
                            let others: Vec<_> = (0..3).filter(|&j| j != i).map(|j| starts[j]).collect();
                            trace(bits, p, starts[i], &others)
                        })
                        .collect();
                    let dirs: Vec<f64> = traces.iter().map(|t| direction(p, t.end)).collect();
                    // The two branches closest in direction form the fork;
                    // the minutia points away from the remaining stem.
                    let stem = (0..3)
                        .min_by(|&a, &b| {
                            let ga = angle_gap(dirs[(a + 1) % 3], dirs[(a + 2) % 3]);
                            let gb = angle_gap(dirs[(b + 1) % 3], dirs[(b + 2) % 3]);
                            ga.total_cmp(&gb)
                        })
                        .unwrap();
                    let artifact = traces.iter().any(|t| t.hit_minutia && t.steps < SHORT_RIDGE);
                    (MinutiaKind::Bifurcation, dirs[stem] + PI, artifact)
                }
                _ => continue,
            };
            let artifact = artifact || (kind == MinutiaKind::RidgeEnding && aims_off_edge(&skel.mask, p, angle));
            let mut m = Minutia::new(x as f64, y as f64, angle, kind);
            m.reliability = orientation.coherence_at(x, y).clamp(0.0, 1.0);
            found.push((m, artifact));
        }
    }
    // Minutiae crowding each other are broken ridges, spurs or bridges.
    // `found` is in raster order, so later rows beyond reach end the scan.
    let n = found.len();
    let mut drop: Vec<bool> = found.iter().map(|&(_, a)| a).collect();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&found[i].0, &found[j].0);
            if b.y - a.y >= BREAK_DISTANCE {
                break;
            }
            let d = (a.x - b.x).hypot(a.y - b.y);
            let facing = a.kind == MinutiaKind::RidgeEnding
                && b.kind == MinutiaKind::RidgeEnding
                && d < BREAK_DISTANCE
                && angle_gap(a.angle, (b.y - a.y).atan2(b.x - a.x)) < BREAK_AIM
                && angle_gap(b.angle, (a.y - b.y).atan2(a.x - b.x)) < BREAK_AIM;
            if d < MIN_SEPARATION || facing {
                drop[i] = true;
                drop[j] = true;
            }
        }
    }
    let minutiae = found
        .into_iter()
        .zip(drop)
        .filter(|(_, d)| !d)
        .map(|((m, _), _)| m)
        .collect();
    MinutiaSet::new(w, h, minutiae)
}
