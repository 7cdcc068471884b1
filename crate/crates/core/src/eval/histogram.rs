use crate::error::{Error, Result};

/// Equal-width histogram; `edges` has one more entry than `counts`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDistribution {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl ScoreDistribution {
    pub fn normalized(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| if self.total > 0 { c as f64 / self.total as f64 } else { 0.0 })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out += &format!("{},{},{}\n", self.edges[i], self.edges[i + 1], c);
        }
        out
    }
}

/// Equal-width bins over `[0, max(scores)]`.
pub fn histogram(scores: &[f64], bins: usize) -> Result<ScoreDistribution> {
    let hi = scores.iter().copied().fold(0.0f64, f64::max);
    histogram_range(scores, bins, 0.0, hi)
}

/// Equal-width bins over `[lo, hi]`; values outside land in the end bins,
/// and the top edge is inclusive.
pub fn histogram_range(scores: &[f64], bins: usize, lo: f64, hi: f64) -> Result<ScoreDistribution> {
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * width }).collect();
    let mut counts = vec![0u64; bins];
    for &s in scores {
        let k = ((s - lo) / width).floor();
        let k = if k.is_nan() { 0 } else { (k.max(0.0) as usize).min(bins - 1) };
        counts[k] += 1;
    }
    Ok(ScoreDistribution {
        edges,
        counts,
        total: scores.len() as u64,
    })
}

/// Total-variation distance between two histograms on the same bins.
pub fn uniqueness_compare(a: &ScoreDistribution, b: &ScoreDistribution) -> Result<f64> {
    if a.edges != b.edges {
        return Err(Error::Validation("histograms use different bins".into()));
    }
    if a.total == 0 || b.total == 0 {
        return Err(Error::Validation("cannot compare an empty histogram".into()));
    }
    let (p, q) = (a.normalized(), b.normalized());
    Ok(0.5 * p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(histogram(&[1.0, 1.0, 1.0], 1).unwrap().counts, vec![3]);
        assert_eq!(histogram(&[0.0, 10.0], 2).unwrap().counts, vec![1, 1]);
    }

    #[test]
    fn tv_extremes() {
        let a = histogram_range(&[1.0, 2.0], 2, 0.0, 10.0).unwrap();
        assert_eq!(uniqueness_compare(&a, &a).unwrap(), 0.0);
        let b = histogram_range(&[9.0], 2, 0.0, 10.0).unwrap();
        assert_eq!(uniqueness_compare(&a, &b).unwrap(), 1.0);
        let c = histogram_range(&[9.0], 3, 0.0, 10.0).unwrap();
        assert!(uniqueness_compare(&a, &c).is_err());
    }
}
