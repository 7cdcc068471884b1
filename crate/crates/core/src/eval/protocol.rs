use std::collections::BTreeMap;

use crate::manifest::DatasetManifest;
use crate::types::FingerClass;

/// How pairs of different identities are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonMatedPolicy {
    /// Any two records with different subjects, whatever their classes.
    /// Two fingers of the same subject are never paired.
    #[default]
    ExcludeSameSubject,
}

/// Mated and non-mated record pairs as `(i, j)` indices into the manifest
/// with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairProtocol {
    pub mated: Vec<(usize, usize)>,
    pub nonmated: Vec<(usize, usize)>,
    pub policy: NonMatedPolicy,
}

impl PairProtocol {
    pub fn build(manifest: &DatasetManifest) -> Self {
        PairProtocol {
            mated: build_mated_pairs(manifest),
            nonmated: build_nonmated_pairs(manifest),
            policy: NonMatedPolicy::ExcludeSameSubject,
        }
    }
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Unordered pairs sharing subject and class but not impression.
pub fn build_mated_pairs(manifest: &DatasetManifest) -> Vec<(usize, usize)> {
    let mut groups: BTreeMap<(u64, FingerClass), Vec<usize>> = BTreeMap::new();
    for (i, r) in manifest.records.iter().enumerate() {
        groups.entry((r.subject, r.class)).or_default().push(i);
    }
    let recs = &manifest.records;
    let mut pairs = Vec::new();
    for members in groups.values() {
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                if recs[i].impression != recs[j].impression {
                    pairs.push((i.min(j), i.max(j)));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Lazily enumerated unordered pairs with different subjects, in
/// lexicographic `(i, j)` order.
pub fn nonmated_pairs(manifest: &DatasetManifest) -> impl Iterator<Item = (usize, usize)> + '_ {
    let recs = &manifest.records;
    (0..recs.len()).flat_map(move |i| {
        (i + 1..recs.len())
            .filter(move |&j| recs[i].subject != recs[j].subject)
            .map(move |j| (i, j))
    })
}

pub fn build_nonmated_pairs(manifest: &DatasetManifest) -> Vec<(usize, usize)> {
    nonmated_pairs(manifest).collect()
}

/// Closed form: for every (subject, class) group, pairs of records minus
/// pairs that repeat an impression.
pub fn count_mated_pairs(manifest: &DatasetManifest) -> u64 {
    let mut groups: BTreeMap<(u64, FingerClass), BTreeMap<u32, u64>> = BTreeMap::new();
    for r in &manifest.records {
        *groups.entry((r.subject, r.class)).or_default().entry(r.impression).or_default() += 1;
    }
    groups
        .values()
        .map(|imps| {
            let total: u64 = imps.values().sum();
            choose2(total) - imps.values().map(|&m| choose2(m)).sum::<u64>()
        })
        .sum()
}

/// Closed form: `C(N, 2) - sum over subjects of C(n_s, 2)`.
pub fn count_nonmated_pairs(manifest: &DatasetManifest) -> u64 {
    let mut per_subject: BTreeMap<u64, u64> = BTreeMap::new();
    for r in &manifest.records {
        *per_subject.entry(r.subject).or_default() += 1;
    }
    choose2(manifest.len() as u64) - per_subject.values().map(|&n| choose2(n)).sum::<u64>()
}
