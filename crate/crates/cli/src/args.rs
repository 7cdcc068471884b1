use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fingersynth_core::{FingerClass, Material};

#[derive(Debug, Parser)]
#[command(name = "fingersynth", version, about = "Synthetic fingerprint dataset generation and evaluation")]
pub struct Cli {
    /// Log progress, not only warnings.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render master prints, impressions and optional spoofs to PNG plus a manifest.
    Generate(GenerateArgs),
    /// Quality report, pair protocol scores, TAR/FAR, histograms and privacy scan.
    Evaluate(EvaluateArgs),
    /// Score an explicit list of image pairs.
    Match(MatchArgs),
    /// Check that every spoof material has as many records as live.
    Balance(BalanceArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Finger classes, e.g. `1-10` or `1,5,6-8`.
    #[arg(long, default_value = "1-10", value_parser = parse_classes)]
    pub classes: ClassList,
    /// Subjects (master prints) per class.
    #[arg(long)]
    pub subjects: u64,
    /// Impressions per finger.
    #[arg(long, default_value_t = 3)]
    pub impressions: u32,
    #[arg(long, default_value = "Live", value_parser = parse_material)]
    pub material: Material,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest_a: PathBuf,
    /// Second dataset; enables the cross-dataset privacy scan and the
    /// uniqueness comparison.
    #[arg(long)]
    pub manifest_b: Option<PathBuf>,
    /// Fixed decision thresholds to report; repeatable.
    #[arg(long = "threshold")]
    pub thresholds: Vec<f64>,
    /// Target false-match rate in percent; its threshold is derived per dataset.
    #[arg(long, default_value_t = 0.01)]
    pub far_target: f64,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Manifest whose paths the first column refers to.
    #[arg(long)]
    pub manifest_a: PathBuf,
    /// Manifest for the second column; defaults to the first.
    #[arg(long)]
    pub manifest_b: Option<PathBuf>,
    /// CSV of `id_a,id_b` rows, where ids are manifest paths.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassList(pub Vec<FingerClass>);

pub fn parse_material(s: &str) -> Result<Material, String> {
    s.parse().map_err(|e: fingersynth_core::Error| e.to_string())
}

/// Comma-separated class indices and inclusive ranges.
pub fn parse_classes(s: &str) -> Result<ClassList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (part, part),
        };
        let lo: u8 = lo.parse().map_err(|_| format!("bad class '{part}'"))?;
        let hi: u8 = hi.parse().map_err(|_| format!("bad class '{part}'"))?;
        if lo > hi {
            return Err(format!("empty class range '{part}'"));
        }
        for i in lo..=hi {
            let c = FingerClass::new(i).map_err(|e| e.to_string())?;
            if out.contains(&c) {
                return Err(format!("class {i} listed twice"));
            }
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err("no classes given".into());
    }
    Ok(ClassList(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_lists() {
        let idx = |s| parse_classes(s).unwrap().0.iter().map(|c| c.index()).collect::<Vec<_>>();
        assert_eq!(idx("1-10"), (1..=10).collect::<Vec<_>>());
        assert_eq!(idx("2, 5-6"), vec![2, 5, 6]);
        assert!(parse_classes("0").is_err());
        assert!(parse_classes("11").is_err());
        assert!(parse_classes("3,3").is_err());
        assert!(parse_classes("").is_err());
    }

    #[test]
    fn materials() {
        assert_eq!(parse_material("oomoo").unwrap(), Material::Oomoo);
        assert!(parse_material("clay").is_err());
    }
}
