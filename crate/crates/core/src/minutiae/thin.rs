use crate::raster::BinaryMask;

use super::enhance::RidgeMap;

/// One-pixel-wide ridge skeleton and the foreground it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub bits: BinaryMask,
    pub mask: BinaryMask,
}

impl Skeleton {
    /// Skeleton whose foreground is the whole frame.
    pub fn unmasked(bits: BinaryMask) -> Self {
        let mask = BinaryMask::full(bits.width(), bits.height());
        Skeleton { bits, mask }
    }
}

pub fn thin(map: &RidgeMap) -> Skeleton {
    Skeleton {
        bits: thin_mask(&map.ridges),
        mask: map.mask.clone(),
    }
}

/// Neighbours clockwise from north: N, NE, E, SE, S, SW, W, NW.
#[inline]
pub(crate) fn ring(m: &BinaryMask, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as i64, y as i64);
    [
        m.get_signed(x, y - 1),
        m.get_signed(x + 1, y - 1),
        m.get_signed(x + 1, y),
        m.get_signed(x + 1, y + 1),
        m.get_signed(x, y + 1),
        m.get_signed(x - 1, y + 1),
        m.get_signed(x - 1, y),
        m.get_signed(x - 1, y - 1),
    ]
}

fn zhang_suen_pass(m: &mut BinaryMask, first: bool) -> bool {
    let (w, h) = (m.width(), m.height());
    let mut doomed = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !m.get(x, y) {
                continue;
            }
            let p = ring(m, x, y);
            let b = p.iter().filter(|&&v| v).count();
            if !(2..=6).contains(&b) {
                continue;
            }
            let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
            if a != 1 {
                continue;
            }
            let (n, e, s, wst) = (p[0], p[2], p[4], p[6]);
            let ok = if first {
                !(n && e && s) && !(e && s && wst)
            } else {
                !(n && e && wst) && !(n && s && wst)
            };
            if ok {
                doomed.push((x, y));
            }
        }
    }
    // Recheck against the partially updated image so that small blobs such
    // as a 2x2 square never vanish completely.
    let mut changed = false;
    for &(x, y) in &doomed {
        let p = ring(m, x, y);
        let b = p.iter().filter(|&&v| v).count();
        let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
        if b >= 2 && a == 1 {
            m.set(x, y, false);
            changed = true;
        }
    }
    changed
}

/// Removes staircase corners: a pixel with two perpendicular 4-neighbours
/// whose opposite side is entirely empty is redundant under 8-connectivity.
fn staircase_pass(m: &mut BinaryMask) -> bool {
    let (w, h) = (m.width(), m.height());
    let mut changed = false;
    for y in 0..h {
        for x in 0..w {
            if !m.get(x, y) {
                continue;
            }
            let p = ring(m, x, y);
            // (a, b) perpendicular 4-neighbours; the other two 4-neighbours
            // and the diagonal between them must be empty.
            let corner = (0..4).any(|k| {
                let a = 2 * k;
                let b = (a + 2) % 8;
                let oa = (a + 4) % 8;
                let ob = (b + 4) % 8;
                let diag = (oa + 1) % 8;
                p[a] && p[b] && !p[oa] && !p[ob] && !p[diag]
            });
            if corner {
                m.set(x, y, false);
                changed = true;
            }
        }
    }
    changed
}

/// Zhang-Suen thinning followed by staircase removal, repeated to a fixed
/// point, so applying it twice changes nothing.
pub fn thin_mask(mask: &BinaryMask) -> BinaryMask {
    let mut m = mask.clone();
    loop {
        let mut changed = false;
        loop {
            let a = zhang_suen_pass(&mut m, true);
            let b = zhang_suen_pass(&mut m, false);
            if !(a || b) {
                break;
            }
            changed = true;
        }
        changed |= staircase_pass(&mut m);
        if !changed {
            return m;
        }
    }
}
