//! Acceptance criteria 1-9. Every check writes one `criterion N: PASS|FAIL`
//! line straight to stderr (bypassing test output capture) before asserting.
//!
//! The desk-scale datasets are 20 subjects x 10 classes x 3 impressions,
//! generated once per test binary from two different master seeds.

use std::io::Write as _;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use fingersynth_core::dataset::generate_to_dir;
use fingersynth_core::eval::{
    build_mated_pairs, build_nonmated_pairs, count_mated_pairs, count_nonmated_pairs, cross_scan, far_percent,
    histogram_range, privacy_scan, score_pairs, tar_far, threshold_for_far, uniqueness_compare, PrivacyScanResult,
};
use fingersynth_core::impression::{
    adjust_contrast, fingerprint_mask, render_impression, sample_params, ImpressionParams, MASK_THRESHOLD,
};
use fingersynth_core::masterprint::{synthesize_master, MasterPrintParams};
use fingersynth_core::minutiae::{analyze_manifest, ManifestAnalysis};
use fingersynth_core::spoof::{cyclegan_objective, CycleGANObjective};
use fingersynth_core::{
    derive_rng, DatasetManifest, FingerClass, GenerateSpec, Material, MinutiaSet, QualityReport, Record, RngStream,
};

const DESK_SUBJECTS: u64 = 20;
const SEED_A: u64 = 7;
const SEED_B: u64 = 1_000_003;
/// Minimum single-threaded scoring rate, template pairs per minute.
const MIN_PAIRS_PER_MINUTE: f64 = 100_000.0;
const SCALING_WORKERS: usize = 4;
const MIN_SPEEDUP: f64 = 3.0;

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {criterion}: {verdict} | {detail}");
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn grid(subjects: u64, classes: u8, impressions: u32) -> DatasetManifest {
    let mut records = Vec::new();
    for subject in 0..subjects {
        for c in 1..=classes {
            for impression in 1..=impressions {
                records.push(Record {
                    path: format!("Live/{c}/{subject}_{impression}.png"),
                    subject,
                    class: FingerClass::new(c).unwrap(),
                    impression,
                    material: Material::Live,
                });
            }
        }
    }
    DatasetManifest::new(records)
}

struct Desk {
    _dir: tempfile::TempDir,
    manifest: DatasetManifest,
    analysis: ManifestAnalysis,
    templates: Vec<MinutiaSet>,
    genuine: Vec<f64>,
    imposter: Vec<f64>,
    build_time: Duration,
}

fn build_desk(seed: u64) -> Desk {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let spec = GenerateSpec {
        classes: FingerClass::all().collect(),
        subjects: DESK_SUBJECTS,
        impressions: 3,
        material: Material::Live,
        master_seed: seed,
    };
    let manifest = generate_to_dir(&spec, dir.path(), workers()).unwrap();
    let analysis = analyze_manifest(&manifest, dir.path(), workers());
    let templates: Vec<MinutiaSet> = analysis.templates.iter().map(|t| t.clone().unwrap()).collect();
    let scores = |pairs: &[(usize, usize)]| -> Vec<f64> {
        score_pairs(&templates, &templates, pairs, workers()).iter().map(|s| s.value).collect()
    };
    let genuine = scores(&build_mated_pairs(&manifest));
    let imposter = scores(&build_nonmated_pairs(&manifest));
    Desk {
        _dir: dir,
        manifest,
        analysis,
        templates,
        genuine,
        imposter,
        build_time: start.elapsed(),
    }
}

fn desk_a() -> &'static Desk {
    static A: OnceLock<Desk> = OnceLock::new();
    A.get_or_init(|| build_desk(SEED_A))
}

fn desk_b() -> &'static Desk {
    static B: OnceLock<Desk> = OnceLock::new();
    B.get_or_init(|| build_desk(SEED_B))
}

fn common_histograms(a: &[f64], b: &[f64], bins: usize) -> f64 {
    let hi = a.iter().chain(b).copied().fold(0.0, f64::max);
    let ha = histogram_range(a, bins, 0.0, hi).unwrap();
    let hb = histogram_range(b, bins, 0.0, hi).unwrap();
    uniqueness_compare(&ha, &hb).unwrap()
}

#[test]
fn criterion_1_pair_combinatorics() {
    let start = Instant::now();
    let db = grid(50, 10, 3);
    let spoofgan = grid(500, 1, 3);
    let counts = (
        count_mated_pairs(&db),
        count_nonmated_pairs(&db),
        count_mated_pairs(&spoofgan),
        count_nonmated_pairs(&spoofgan),
    );
    let cross = cross_scan(20_844, 1_500, 1.0, 1, |_, _| 0.0).pairs_compared;
    let counting = start.elapsed();

    // Brute-force enumeration on scaled instances, against the closed forms.
    let start = Instant::now();
    let mut brute_ok = true;
    for (s, c, i) in [(5u64, 10u8, 3u32), (60, 1, 3), (4, 10, 5), (100, 2, 1)] {
        let m = grid(s, c, i);
        assert!(m.len() <= 200);
        let r = &m.records;
        let (mut mated, mut nonmated) = (0u64, 0u64);
        for x in 0..r.len() {
            for y in x + 1..r.len() {
                if r[x].subject == r[y].subject && r[x].class == r[y].class && r[x].impression != r[y].impression {
                    mated += 1;
                }
                if r[x].subject != r[y].subject {
                    nonmated += 1;
                }
            }
        }
        let closed_mated = s * c as u64 * (i as u64 * (i as u64 - 1) / 2);
        let n = s * c as u64 * i as u64;
        let per = c as u64 * i as u64;
        let closed_nonmated = n * (n - 1) / 2 - s * (per * (per - 1) / 2);
        brute_ok &= mated == closed_mated
            && nonmated == closed_nonmated
            && count_mated_pairs(&m) == mated
            && count_nonmated_pairs(&m) == nonmated
            && build_mated_pairs(&m).len() as u64 == mated
            && build_nonmated_pairs(&m).len() as u64 == nonmated;
    }
    let brute = start.elapsed();

    let pass = counts == (1_500, 1_102_500, 1_500, 1_122_750)
        && cross == 31_266_000
        && brute_ok
        && counting < Duration::from_secs(1)
        && brute < Duration::from_secs(10);
    report(
        "1",
        pass,
        &format!(
            "mated/nonmated 50x10x3 = {}/{}, 500x1x3 = {}/{}, cross = {cross}, brute-force ok = {brute_ok}, counting {counting:?}, brute force {brute:?}",
            counts.0, counts.1, counts.2, counts.3
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_far_arithmetic() {
    let a = far_percent(57, 1_000_000);
    let b = PrivacyScanResult::new(31_266_000, 118).effective_far;
    let c = PrivacyScanResult::new(31_266_000, 155).effective_far;
    let (fb, fc) = (format!("{b:.6}"), format!("{c:.6}"));
    let pass = a == 0.0057 && fb == "0.000377" && fc == "0.000496";
    report("2", pass, &format!("57/1e6 = {a}%, 118/31266000 = {fb}%, 155/31266000 = {fc}%"));
    assert!(pass);
}

#[test]
fn criterion_3_training_objective() {
    let mut rng = RngStream::from_seed(3);
    let mut cases = vec![[0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 2.0, 0.0], [0.5, 0.5, 1.0, 1.0]];
    cases.extend((0..1000).map(|_| [rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)]));
    let mut worst: f64 = 0.0;
    for v in &cases {
        let got = cyclegan_objective(&CycleGANObjective::new(v[0], v[1], v[2], v[3])).unwrap();
        let want = v[0] + v[1] + 10.0 * v[2] + 0.5 * v[3];
        worst = worst.max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
    }
    let fixed = [
        cyclegan_objective(&CycleGANObjective::new(1.0, 1.0, 2.0, 0.0)).unwrap(),
        cyclegan_objective(&CycleGANObjective::new(0.5, 0.5, 1.0, 1.0)).unwrap(),
    ];
    let pass = worst <= 1e-12 && fixed == [22.0, 11.5];
    report("3", pass, &format!("{} vectors, worst relative error {worst:e}, (1,1,2,0) = {}, (0.5,0.5,1,1) = {}", cases.len(), fixed[0], fixed[1]));
    assert!(pass);
}

#[test]
fn criterion_4_impression_parameters() {
    let start = Instant::now();
    let mut rng = RngStream::from_seed(4);
    let mut in_range = 0;
    for _ in 0..10_000 {
        let p = sample_params(&mut rng);
        if (-10.0..=10.0).contains(&p.dx)
            && (-10.0..=10.0).contains(&p.dy)
            && (-30.0..=30.0).contains(&p.angle)
            && (0.7..=1.3).contains(&p.alpha)
            && (-30.0..=30.0).contains(&p.beta)
            && p.is_valid()
        {
            in_range += 1;
        }
    }

    let class = FingerClass::new(6).unwrap();
    let mut mrng = derive_rng(4, 0, class, 0);
    let params = MasterPrintParams::sample(class, &mut mrng);
    let master = synthesize_master(&params, class, &mut mrng).unwrap().image;
    let mask = fingerprint_mask(&master, MASK_THRESHOLD);
    let mut background_kept = true;
    for _ in 0..50 {
        let (alpha, beta) = (rng.uniform(0.7, 1.3), rng.uniform(-30.0, 30.0));
        let out = adjust_contrast(&master, &mask, alpha, beta);
        background_kept &= (0..512 * 512).all(|i| mask.bits()[i] || out.pixels()[i] == master.pixels()[i]);
    }
    let identity = render_impression(&master, &ImpressionParams::identity()) == master;
    let elapsed = start.elapsed();

    let pass = in_range == 10_000 && background_kept && identity && elapsed < Duration::from_secs(30);
    report(
        "4",
        pass,
        &format!("{in_range}/10000 samples in range, out-of-mask pixels unchanged = {background_kept}, zero-parameter identity = {identity}, {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_5_desk_scale_separation() {
    let desk = desk_a();
    let start = Instant::now();
    let op = threshold_for_far(&desk.imposter, 0.1).unwrap();
    let point = tar_far(&desk.genuine, &desk.imposter, op.threshold).unwrap();
    let tv = common_histograms(&desk.genuine, &desk.imposter, 50);
    let elapsed = desk.build_time + start.elapsed();
    let pass = point.tar >= 95.0 && tv >= 0.9 && elapsed < Duration::from_secs(600);
    report(
        "5",
        pass,
        &format!(
            "{} images, {} genuine / {} imposter pairs, threshold {:.3} (FAR {:.4}%{}), TAR {:.2}%, TV {:.4}, {elapsed:?}",
            desk.manifest.len(),
            desk.genuine.len(),
            desk.imposter.len(),
            op.threshold,
            point.far,
            if op.saturated { ", saturated" } else { "" },
            point.tar,
            tv
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_privacy_scan() {
    let (a, b) = (desk_a(), desk_b());
    let start = Instant::now();
    let op = threshold_for_far(&a.imposter, 0.01).unwrap();
    let scan = privacy_scan(&a.templates, &b.templates, op.threshold, workers());
    let elapsed = start.elapsed();
    let pass = scan.pairs_compared == (a.templates.len() * b.templates.len()) as u64
        && scan.effective_far <= 0.02
        && elapsed < Duration::from_secs(600);
    report(
        "6",
        pass,
        &format!(
            "threshold {:.3} (FAR 0.01% on the first set), {} of {} cross pairs matched, effective FAR {:.5}%, {elapsed:?}",
            op.threshold, scan.matches_above_threshold, scan.pairs_compared, scan.effective_far
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_uniqueness() {
    let (a, b) = (desk_a(), desk_b());
    let tv = common_histograms(&a.imposter, &b.imposter, 20);
    let pass = tv < 0.1;
    report("7", pass, &format!("non-mated TV distance between independently seeded sets = {tv:.4}"));
    assert!(pass);
}

#[test]
fn criterion_8_quality_report() {
    let desk = desk_a();
    let r: &QualityReport = &desk.analysis.report;
    let csv = r.to_csv();
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
    let sane = r.rows().iter().all(|(_, s)| s.mean.is_finite() && s.std >= 0.0);
    let endings = r.ridge_ending_count.mean;
    let bif = r.bifurcation_percentage.mean;
    let pass = rows == 7 && sane && r.skipped == 0 && (20.0..=120.0).contains(&endings) && (5.0..=60.0).contains(&bif);
    report(
        "8",
        pass,
        &format!(
            "{} images, ridge endings {:.2} ({:.2}), bifurcations {:.2} ({:.2}), bifurcation % {:.2} ({:.2}), area % {:.2} ({:.2}), quality proxy {:.2} ({:.2})",
            r.images,
            endings,
            r.ridge_ending_count.std,
            r.bifurcation_count.mean,
            r.bifurcation_count.std,
            bif,
            r.bifurcation_percentage.std,
            r.fingerprint_area.mean,
            r.fingerprint_area.std,
            r.quality_score.mean,
            r.quality_score.std
        ),
    );
    assert!(pass);
}

/// Scores a fixed slice of non-mated pairs and returns (rate per minute,
/// score checksum, time).
fn timed_scoring(templates: &[MinutiaSet], pairs: &[(usize, usize)], workers: usize) -> (f64, (u64, u64), Duration) {
    let start = Instant::now();
    let scores = score_pairs(templates, templates, pairs, workers);
    let elapsed = start.elapsed();
    let checksum = scores.iter().fold((0u64, 0u64), |(bits, pairs), s| {
        (bits.wrapping_add(s.value.to_bits()), pairs + s.supporting_pairs as u64)
    });
    (pairs.len() as f64 / elapsed.as_secs_f64() * 60.0, checksum, elapsed)
}

fn scaling_pairs() -> Vec<(usize, usize)> {
    build_nonmated_pairs(&desk_a().manifest).into_iter().step_by(4).take(40_000).collect()
}

#[test]
fn criterion_9a_single_thread_throughput() {
    let desk = desk_a();
    let pairs = scaling_pairs();
    let (rate, one, t1) = timed_scoring(&desk.templates, &pairs, 1);
    let (_, again, _) = timed_scoring(&desk.templates, &pairs, 2);
    let pass = rate >= MIN_PAIRS_PER_MINUTE && one == again;
    report(
        "9a",
        pass,
        &format!("{} template pairs in {t1:?} on 1 worker = {rate:.0} pairs/min, aggregates identical across worker counts = {}", pairs.len(), one == again),
    );
    assert!(pass);
}

#[test]
fn criterion_9b_parallel_scaling() {
    let desk = desk_a();
    let pairs = scaling_pairs();
    let (r1, one, t1) = timed_scoring(&desk.templates, &pairs, 1);
    let (r4, four, t4) = timed_scoring(&desk.templates, &pairs, SCALING_WORKERS);
    let speedup = r4 / r1;
    let pass = speedup >= MIN_SPEEDUP && one == four;
    report(
        "9b",
        pass,
        &format!(
            "{} pairs: 1 worker {t1:?}, {SCALING_WORKERS} workers {t4:?}, speedup {speedup:.2}x (need {MIN_SPEEDUP}x), identical aggregates = {}, available cores = {}",
            pairs.len(),
            one == four,
            workers()
        ),
    );
    assert!(pass, "speedup {speedup:.2}x below {MIN_SPEEDUP}x");
}
