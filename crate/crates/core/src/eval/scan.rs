use rayon::prelude::*;

use crate::matcher::{match_minutiae, MatchScore};
use crate::minutiae::MinutiaSet;
use crate::parallel::with_workers;

use super::rates::far_percent;

/// Rows of the first dataset handled per work item.
pub const SCAN_BLOCK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyScanResult {
    pub pairs_compared: u64,
    pub matches_above_threshold: u64,
    /// `100 * matches / pairs`.
    pub effective_far: f64,
}

impl PrivacyScanResult {
    pub fn new(pairs_compared: u64, matches_above_threshold: u64) -> Self {
        PrivacyScanResult {
            pairs_compared,
            matches_above_threshold,
            effective_far: far_percent(matches_above_threshold, pairs_compared),
        }
    }
}

/// Scores every `(i, j)` in `0..n_a x 0..n_b` and counts scores at or
/// above `threshold`. Work is split into row blocks and only counts are
/// kept, so memory does not grow with the number of pairs and the result
/// does not depend on `workers`.
pub fn cross_scan<F>(n_a: usize, n_b: usize, threshold: f64, workers: usize, score: F) -> PrivacyScanResult
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let blocks = n_a.div_ceil(SCAN_BLOCK);
    let matches: u64 = with_workers(workers, || {
        (0..blocks)
            .into_par_iter()
            .map(|blk| {
                let rows = blk * SCAN_BLOCK..((blk + 1) * SCAN_BLOCK).min(n_a);
                let mut hits = 0u64;
                for i in rows {
                    for j in 0..n_b {
                        if score(i, j) >= threshold {
                            hits += 1;
                        }
                    }
                }
                hits
            })
            .sum()
    });
    PrivacyScanResult::new(n_a as u64 * n_b as u64, matches)
}

/// Cross-dataset leakage scan: every template of `a` against every
/// template of `b`.
pub fn privacy_scan(a: &[MinutiaSet], b: &[MinutiaSet], threshold: f64, workers: usize) -> PrivacyScanResult {
    cross_scan(a.len(), b.len(), threshold, workers, |i, j| match_minutiae(&a[i], &b[j]).value)
}

/// Scores of `(a[i], b[j])` for every listed pair, in list order.
pub fn score_pairs(a: &[MinutiaSet], b: &[MinutiaSet], pairs: &[(usize, usize)], workers: usize) -> Vec<MatchScore> {
    with_workers(workers, || {
        pairs
            .par_iter()
            .with_min_len(64)
            .map(|&(i, j)| match_minutiae(&a[i], &b[j]))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_rate() {
        let r = cross_scan(40, 25, 10.0, 2, |i, j| ((i * 7 + j * 3) % 20) as f64);
        let brute = (0..40).flat_map(|i| (0..25).map(move |j| (i, j))).filter(|&(i, j)| (i * 7 + j * 3) % 20 >= 10).count();
        assert_eq!(r.pairs_compared, 1000);
        assert_eq!(r.matches_above_threshold, brute as u64);
        assert_eq!(r.effective_far, 100.0 * brute as f64 / 1000.0);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let f = |i: usize, j: usize| ((i * 31 + j * 17) % 97) as f64;
        let one = cross_scan(70, 33, 50.0, 1, f);
        let four = cross_scan(70, 33, 50.0, 4, f);
        assert_eq!(one, four);
    }
}
