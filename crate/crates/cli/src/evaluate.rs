use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use fingersynth_core::eval::{
    build_mated_pairs, build_nonmated_pairs, histogram_range, privacy_scan, score_pairs, tar_far, threshold_for_far,
    uniqueness_compare, TarFarPoint,
};
use fingersynth_core::manifest::{manifest_base, read_manifest};
use fingersynth_core::minutiae::{analyze_manifest, ManifestAnalysis};
use fingersynth_core::{DatasetManifest, MatchScore, MinutiaSet};

use crate::args::EvaluateArgs;

/// Share of unreadable images above which the run fails.
const MAX_MISSING_FRACTION: f64 = 0.01;

struct Dataset {
    name: &'static str,
    manifest: DatasetManifest,
    analysis: ManifestAnalysis,
    genuine: Vec<Scored>,
    imposter: Vec<Scored>,
}

struct Scored {
    a: usize,
    b: usize,
    score: MatchScore,
}

impl Dataset {
    fn load(name: &'static str, path: &Path, workers: usize) -> anyhow::Result<Dataset> {
        let manifest = read_manifest(path).with_context(|| format!("reading {}", path.display()))?;
        manifest.validate()?;
        log::info!("dataset {name}: {} records", manifest.len());
        let analysis = analyze_manifest(&manifest, &manifest_base(path), workers);
        let templates = &analysis.templates;
        let present = |pairs: Vec<(usize, usize)>| -> Vec<(usize, usize)> {
            pairs.into_iter().filter(|&(i, j)| templates[i].is_some() && templates[j].is_some()).collect()
        };
        let mated = present(build_mated_pairs(&manifest));
        let nonmated = present(build_nonmated_pairs(&manifest));
        let sets: Vec<MinutiaSet> = templates.iter().map(|t| t.clone().unwrap_or_else(|| MinutiaSet::new(0, 0, Vec::new()))).collect();
        let score = |pairs: Vec<(usize, usize)>| -> Vec<Scored> {
            let scores = score_pairs(&sets, &sets, &pairs, workers);
            pairs.into_iter().zip(scores).map(|((a, b), score)| Scored { a, b, score }).collect()
        };
        log::info!("dataset {name}: scoring {} mated and {} non-mated pairs", mated.len(), nonmated.len());
        let genuine = score(mated);
        let imposter = score(nonmated);
        Ok(Dataset {
            name,
            manifest,
            analysis,
            genuine,
            imposter,
        })
    }

    fn missing_fraction(&self) -> f64 {
        if self.manifest.is_empty() {
            0.0
        } else {
            self.analysis.missing() as f64 / self.manifest.len() as f64
        }
    }

    fn values(scores: &[Scored]) -> Vec<f64> {
        scores.iter().map(|s| s.score.value).collect()
    }

    fn templates(&self) -> Vec<MinutiaSet> {
        self.analysis.templates.iter().flatten().cloned().collect()
    }
}

fn write_scores(path: &Path, ds: &Dataset, scores: &[Scored]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id_a", "id_b", "score", "pairs"])?;
    let recs = &ds.manifest.records;
    for s in scores {
        w.write_record([
            recs[s.a].path.as_str(),
            recs[s.b].path.as_str(),
            &format!("{:.6}", s.score.value),
            &s.score.supporting_pairs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn tar_far_row(w: &mut csv::Writer<fs::File>, dataset: &str, p: &TarFarPoint, source: &str) -> anyhow::Result<()> {
    w.write_record([
        format!("{:.6}", p.threshold),
        dataset.to_string(),
        format!("{:.4}", p.tar),
        format!("{:.6}", p.far),
        p.genuine_accepted.to_string(),
        p.genuine_total.to_string(),
        p.imposter_accepted.to_string(),
        p.imposter_total.to_string(),
        source.to_string(),
    ])?;
    Ok(())
}

pub fn run(a: &EvaluateArgs) -> anyhow::Result<ExitCode> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let out = |name: &str| -> PathBuf { a.out.join(name) };

    let mut datasets = vec![Dataset::load("a", &a.manifest_a, a.workers)?];
    if let Some(b) = &a.manifest_b {
        datasets.push(Dataset::load("b", b, a.workers)?);
    }

    let mut protocol = csv::Writer::from_path(out("protocol.csv"))?;
    protocol.write_record(["dataset", "images", "missing", "mated_pairs", "nonmated_pairs"])?;
    let mut rates = csv::Writer::from_path(out("tar_far.csv"))?;
    rates.write_record([
        "threshold",
        "dataset",
        "tar",
        "far",
        "genuine_accepted",
        "genuine_total",
        "imposter_accepted",
        "imposter_total",
        "source",
    ])?;
    let top = datasets
        .iter()
        .flat_map(|d| d.genuine.iter().chain(&d.imposter))
        .map(|s| s.score.value)
        .fold(0.0, f64::max);
    let mut far_thresholds = Vec::new();

    for ds in &datasets {
        let n = ds.name;
        fs::write(out(&format!("quality_{n}.csv")), ds.analysis.report.to_csv())?;
        protocol.write_record([
            n.to_string(),
            ds.manifest.len().to_string(),
            ds.analysis.missing().to_string(),
            ds.genuine.len().to_string(),
            ds.imposter.len().to_string(),
        ])?;
        write_scores(&out(&format!("scores_{n}_mated.csv")), ds, &ds.genuine)?;
        write_scores(&out(&format!("scores_{n}_nonmated.csv")), ds, &ds.imposter)?;

        let (genuine, imposter) = (Dataset::values(&ds.genuine), Dataset::values(&ds.imposter));
        for (kind, scores) in [("mated", &genuine), ("nonmated", &imposter)] {
            let h = histogram_range(scores, a.bins, 0.0, top)?;
            fs::write(out(&format!("histogram_{n}_{kind}.csv")), h.to_csv())?;
        }
        if genuine.is_empty() || imposter.is_empty() {
            log::warn!("dataset {n}: no mated or no non-mated pairs; skipping TAR/FAR");
            far_thresholds.push(None);
            continue;
        }
        for &t in &a.thresholds {
            tar_far_row(&mut rates, n, &tar_far(&genuine, &imposter, t)?, "fixed")?;
        }
        let op = threshold_for_far(&imposter, a.far_target)?;
        let source = format!("far_target={}{}", a.far_target, if op.saturated { " (saturated)" } else { "" });
        tar_far_row(&mut rates, n, &tar_far(&genuine, &imposter, op.threshold)?, &source)?;
        println!(
            "dataset {n}: {} images, {} mated / {} non-mated pairs, threshold {:.4} for FAR {}%",
            ds.manifest.len(),
            genuine.len(),
            imposter.len(),
            op.threshold,
            a.far_target
        );
        far_thresholds.push(Some(op.threshold));
    }
    protocol.flush()?;
    rates.flush()?;

    if let [da, db] = datasets.as_slice() {
        let (ia, ib) = (Dataset::values(&da.imposter), Dataset::values(&db.imposter));
        if !ia.is_empty() && !ib.is_empty() {
            let tv = uniqueness_compare(&histogram_range(&ia, a.bins, 0.0, top)?, &histogram_range(&ib, a.bins, 0.0, top)?)?;
            fs::write(out("uniqueness.csv"), format!("comparison,tv_distance\nnonmated_a_vs_b,{tv:.6}\n"))?;
        }
        let threshold = a.thresholds.first().copied().or(far_thresholds[0]);
        match threshold {
            Some(t) => {
                let scan = privacy_scan(&da.templates(), &db.templates(), t, a.workers);
                fs::write(
                    out("privacy.csv"),
                    format!(
                        "threshold,pairs_compared,matches_above_threshold,effective_far\n{t:.6},{},{},{:.6}\n",
                        scan.pairs_compared, scan.matches_above_threshold, scan.effective_far
                    ),
                )?;
                println!(
                    "privacy scan: {} of {} cross pairs at or above {t:.4} (effective FAR {:.6}%)",
                    scan.matches_above_threshold, scan.pairs_compared, scan.effective_far
                );
            }
            None => log::warn!("no threshold available for the privacy scan"),
        }
    }

    for ds in &datasets {
        let frac = ds.missing_fraction();
        if frac > MAX_MISSING_FRACTION {
            bail!(
                "dataset {}: {} of {} images unreadable ({:.2}% > {:.0}%)",
                ds.name,
                ds.analysis.missing(),
                ds.manifest.len(),
                100.0 * frac,
                100.0 * MAX_MISSING_FRACTION
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
