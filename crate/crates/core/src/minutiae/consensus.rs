//! Orientation consensus: the extractor runs on all four quarter-turn views
//! of an image and keeps the minutiae most views agree on.
//!
//! A quarter turn of the input permutes the four views, so the surviving
//! count is exactly invariant under quarter turns, and artifacts that only
//! one scan direction of the thinner produces are voted out.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use crate::raster::GrayImage;

use super::enhance::{enhance_and_binarize, RidgeMap};
use super::extract::extract_minutiae;
use super::thin::thin;
use super::{Minutia, MinutiaSet};

/// Views that must report a minutia for it to be kept.
pub const CONSENSUS_VIEWS: usize = 3;
/// Detections of one minutia from different views lie within this distance.
const LINK_DISTANCE: f64 = 6.0;
/// Largest direction difference between linked detections.
const LINK_ANGLE: f64 = std::f64::consts::FRAC_PI_3;

/// View `k`: the image turned clockwise `k` quarter turns, so that output
/// pixel (x, y) shows input pixel (y, n-1-x) after one turn.
fn quarter_turn(img: &GrayImage) -> GrayImage {
    let n = img.width();
    GrayImage::from_fn(n, n, |x, y| img.get(y, n - 1 - x))
}

/// Maps a minutia found in a once-turned view back to the unturned frame.
fn unturn(m: &Minutia, n: usize) -> Minutia {
    Minutia {
        x: m.y,
        y: (n - 1) as f64 - m.x,
        angle: (m.angle - FRAC_PI_2).rem_euclid(std::f64::consts::TAU),
        ..*m
    }
}

fn single_view(img: &GrayImage) -> (RidgeMap, MinutiaSet) {
    let map = enhance_and_binarize(img);
    let set = extract_minutiae(&thin(&map), &map.orientation);
    (map, set)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Clusters detections from all views and keeps one averaged minutia per
/// cluster seen by at least [`CONSENSUS_VIEWS`] views.
fn vote(views: &[Vec<Minutia>]) -> Vec<Minutia> {
    let all: Vec<(usize, Minutia)> = views
        .iter()
        .enumerate()
        .flat_map(|(v, ms)| ms.iter().map(move |m| (v, *m)))
        .collect();
    // Bucket by LINK_DISTANCE cells so only neighbouring cells are compared.
    let cell = |m: &Minutia| ((m.x / LINK_DISTANCE).floor() as i64, (m.y / LINK_DISTANCE).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, (_, m)) in all.iter().enumerate() {
        grid.entry(cell(m)).or_default().push(i);
    }
    let mut parent: Vec<usize> = (0..all.len()).collect();
    for i in 0..all.len() {
        let (vi, a) = &all[i];
        let (cx, cy) = cell(a);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &j in bucket.iter().filter(|&&j| j > i) {
                    let (vj, b) = &all[j];
                    if vi != vj
                        && a.kind == b.kind
                        && (a.x - b.x).hypot(a.y - b.y) <= LINK_DISTANCE
                        && angle_gap(a.angle, b.angle) <= LINK_ANGLE
                    {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..all.len() {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }
    let mut out: Vec<Minutia> = clusters
        .values()
        .filter(|members| {
            let mut seen = [false; 4];
            members.iter().for_each(|&i| seen[all[i].0] = true);
            seen.iter().filter(|&&s| s).count() >= CONSENSUS_VIEWS
        })
        .map(|members| {
            let k = members.len() as f64;
            let ms = members.iter().map(|&i| &all[i].1);
            let (sx, sy, sc, ss, sr) = ms.fold((0.0, 0.0, 0.0, 0.0, 0.0), |acc, m| {
                (acc.0 + m.x, acc.1 + m.y, acc.2 + m.angle.cos(), acc.3 + m.angle.sin(), acc.4 + m.reliability)
            });
            let first = all[members[0]].1;
            let mut m = Minutia::new(sx / k, sy / k, ss.atan2(sc), first.kind);
            m.reliability = (sr / k).clamp(0.0, 1.0);
            m
        })
        .collect();
    out.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)).then(a.kind.cmp(&b.kind)));
    out
}

/// Consensus extraction plus the ridge map of the unturned view. Non-square
/// frames fall back to a single view.
pub fn extract_consensus(img: &GrayImage) -> (RidgeMap, MinutiaSet) {
    let (w, h) = (img.width(), img.height());
    let (map, base) = single_view(img);
    if w != h {
        return (map, base);
    }
    let mut views = vec![base.minutiae];
    let mut turned = img.clone();
    for k in 1..4 {
        turned = quarter_turn(&turned);
        let (_, set) = single_view(&turned);
        views.push(
            set.minutiae
                .iter()
                .map(|m| (0..k).fold(*m, |m, _| unturn(&m, w)))
                .collect(),
        );
    }
    (map, MinutiaSet::new(w, h, vote(&views)))
}
