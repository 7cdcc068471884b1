//! Pair protocols, acceptance/false-match rates, score distributions and
//! large cross-dataset scans.

mod histogram;
mod protocol;
mod rates;
mod scan;

pub use histogram::{histogram, histogram_range, uniqueness_compare, ScoreDistribution};
pub use protocol::{
    build_mated_pairs, build_nonmated_pairs, count_mated_pairs, count_nonmated_pairs, nonmated_pairs, NonMatedPolicy,
    PairProtocol,
};
pub use rates::{far_percent, tar_far, threshold_for_far, FarThreshold, TarFarPoint, SATURATION_STEP};
pub use scan::{cross_scan, privacy_scan, score_pairs, PrivacyScanResult, SCAN_BLOCK};
