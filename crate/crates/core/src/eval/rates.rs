use crate::error::{Error, Result};

/// Amount added to the top score when no observed score meets the target.
pub const SATURATION_STEP: f64 = 1e-6;

/// Acceptance rates at one threshold; a score counts as accepted when it is
/// at least the threshold. Raw counts are kept next to the percentages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TarFarPoint {
    pub threshold: f64,
    pub tar: f64,
    pub far: f64,
    pub genuine_accepted: u64,
    pub genuine_total: u64,
    pub imposter_accepted: u64,
    pub imposter_total: u64,
}

/// `100 * matches / pairs` with a single rounding step.
pub fn far_percent(matches: u64, pairs: u64) -> f64 {
    if pairs == 0 {
        return 0.0;
    }
    (100 * matches as u128) as f64 / pairs as f64
}

fn accepted(scores: &[f64], threshold: f64) -> u64 {
    scores.iter().filter(|&&s| s >= threshold).count() as u64
}

pub fn tar_far(genuine: &[f64], imposter: &[f64], threshold: f64) -> Result<TarFarPoint> {
    if genuine.is_empty() {
        return Err(Error::EmptyScores { side: "genuine" });
    }
    if imposter.is_empty() {
        return Err(Error::EmptyScores { side: "imposter" });
    }
    let ga = accepted(genuine, threshold);
    let ia = accepted(imposter, threshold);
    Ok(TarFarPoint {
        threshold,
        tar: far_percent(ga, genuine.len() as u64),
        far: far_percent(ia, imposter.len() as u64),
        genuine_accepted: ga,
        genuine_total: genuine.len() as u64,
        imposter_accepted: ia,
        imposter_total: imposter.len() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarThreshold {
    pub threshold: f64,
    /// False-match rate (%) at the returned threshold.
    pub far: f64,
    /// No observed score value reaches the target; the threshold sits just
    /// above the largest score.
    pub saturated: bool,
}

/// Smallest score value `t` with `far(t) <= far_target` (percent), found by
/// a scan over the sorted scores.
pub fn threshold_for_far(imposter: &[f64], far_target: f64) -> Result<FarThreshold> {
    if imposter.is_empty() {
        return Err(Error::EmptyScores { side: "imposter" });
    }
    if far_target.is_nan() || far_target <= 0.0 {
        return Err(Error::InvalidArgument(format!("far target must be positive, got {far_target}")));
    }
    let mut sorted = imposter.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len() as u64;
    let within = |count: u64| far_percent(count, n) <= far_target;
    // Walk distinct values from the top; `count` is #{s >= value}.
    let mut best: Option<(f64, u64)> = None;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let count = j as u64;
        if !within(count) {
            break;
        }
        best = Some((v, count));
        i = j;
    }
    Ok(match best {
        Some((t, count)) => FarThreshold {
            threshold: t,
            far: far_percent(count, n),
            saturated: false,
        },
        None => FarThreshold {
            threshold: sorted[0] + SATURATION_STEP,
            far: 0.0,
            saturated: true,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_counting() {
        let p = tar_far(&[50.0, 60.0], &[10.0, 49.0], 48.0).unwrap();
        assert_eq!((p.tar, p.far), (100.0, 50.0));
    }

    #[test]
    fn empty_side_is_named() {
        assert!(matches!(tar_far(&[], &[1.0], 1.0), Err(Error::EmptyScores { side: "genuine" })));
        assert!(matches!(tar_far(&[1.0], &[], 1.0), Err(Error::EmptyScores { side: "imposter" })));
    }

    #[test]
    fn uniform_five_percent() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        let t = threshold_for_far(&s, 5.0).unwrap();
        assert_eq!(t.threshold, 96.0);
        assert!(!t.saturated);
    }

    #[test]
    fn all_zero_saturates() {
        let t = threshold_for_far(&[0.0; 50], 0.01).unwrap();
        assert!(t.saturated);
        assert!(t.threshold > 0.0 && t.threshold <= SATURATION_STEP);
    }

    #[test]
    fn ties_are_accepted() {
        let s = [5.0, 5.0, 1.0, 0.0];
        assert_eq!(threshold_for_far(&s, 50.0).unwrap().threshold, 5.0);
        assert!(threshold_for_far(&s, 25.0).unwrap().saturated);
    }
}
