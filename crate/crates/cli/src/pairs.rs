use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use fingersynth_core::eval::score_pairs;
use fingersynth_core::manifest::{manifest_base, read_manifest};
use fingersynth_core::minutiae::analyze_manifest;
use fingersynth_core::spoof::validate_balanced;
use fingersynth_core::{DatasetManifest, MinutiaSet};

use crate::args::{BalanceArgs, MatchArgs};

/// Templates for the listed manifest paths, keyed by path.
fn load_templates(
    manifest_path: &Path,
    wanted: &BTreeSet<String>,
    workers: usize,
) -> anyhow::Result<HashMap<String, MinutiaSet>> {
    let manifest = read_manifest(manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?;
    let known: BTreeSet<&str> = manifest.records.iter().map(|r| r.path.as_str()).collect();
    if let Some(unknown) = wanted.iter().find(|p| !known.contains(p.as_str())) {
        return Err(anyhow!("'{unknown}' is not listed in {}", manifest_path.display()));
    }
    let subset = DatasetManifest::new(manifest.records.into_iter().filter(|r| wanted.contains(&r.path)).collect());
    let analysis = analyze_manifest(&subset, &manifest_base(manifest_path), workers);
    subset
        .records
        .iter()
        .zip(analysis.templates)
        .map(|(r, t)| {
            t.map(|t| (r.path.clone(), t))
                .ok_or_else(|| anyhow!("cannot read image {}", r.path))
        })
        .collect()
}

pub fn run_match(a: &MatchArgs) -> anyhow::Result<ExitCode> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(&a.pairs)
        .with_context(|| format!("reading {}", a.pairs.display()))?;
    let mut listed: Vec<(String, String)> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        if row.len() != 2 {
            return Err(anyhow!("pair list line {}: expected 2 fields, got {}", i + 1, row.len()));
        }
        if i == 0 && &row[0] == "id_a" && &row[1] == "id_b" {
            continue;
        }
        listed.push((row[0].to_string(), row[1].to_string()));
    }
    let manifest_b = a.manifest_b.as_ref().unwrap_or(&a.manifest_a);
    let (ta, tb) = if a.manifest_b.is_some() {
        let wa: BTreeSet<String> = listed.iter().map(|p| p.0.clone()).collect();
        let wb: BTreeSet<String> = listed.iter().map(|p| p.1.clone()).collect();
        (load_templates(&a.manifest_a, &wa, a.workers)?, load_templates(manifest_b, &wb, a.workers)?)
    } else {
        let all: BTreeSet<String> = listed.iter().flat_map(|p| [p.0.clone(), p.1.clone()]).collect();
        let t = load_templates(&a.manifest_a, &all, a.workers)?;
        (t.clone(), t)
    };
    // Index the templates so the pairs can be scored in bulk.
    let index = |map: &HashMap<String, MinutiaSet>| -> (Vec<MinutiaSet>, HashMap<String, usize>) {
        let mut keys: Vec<&String> = map.keys().collect();
        keys.sort();
        let sets = keys.iter().map(|k| map[*k].clone()).collect();
        let pos = keys.iter().enumerate().map(|(i, k)| ((*k).clone(), i)).collect();
        (sets, pos)
    };
    let (sa, pa) = index(&ta);
    let (sb, pb) = index(&tb);
    let pairs: Vec<(usize, usize)> = listed.iter().map(|(x, y)| (pa[x], pb[y])).collect();
    let scores = score_pairs(&sa, &sb, &pairs, a.workers);

    let mut w = csv::Writer::from_path(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    w.write_record(["id_a", "id_b", "score", "pairs"])?;
    for ((x, y), s) in listed.iter().zip(&scores) {
        w.write_record([x.as_str(), y.as_str(), &format!("{:.6}", s.value), &s.supporting_pairs.to_string()])?;
    }
    w.flush()?;
    println!("{} pairs scored into {}", scores.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn run_balance(a: &BalanceArgs) -> anyhow::Result<ExitCode> {
    let manifest = read_manifest(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let report = validate_balanced(&manifest);
    print!("{}", report.to_csv());
    println!("{}", if report.balanced() { "balanced" } else { "unbalanced" });
    Ok(ExitCode::SUCCESS)
}
