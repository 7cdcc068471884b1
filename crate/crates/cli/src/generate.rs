use std::process::ExitCode;

use anyhow::Context;
use fingersynth_core::dataset::{generate_to_dir, MANIFEST_FILE};
use fingersynth_core::GenerateSpec;

use crate::args::GenerateArgs;

pub fn run(a: &GenerateArgs) -> anyhow::Result<ExitCode> {
    let spec = GenerateSpec {
        classes: a.classes.0.clone(),
        subjects: a.subjects,
        impressions: a.impressions,
        material: a.material,
        master_seed: a.seed,
    };
    spec.validate()?;
    log::info!("generating {} images into {}", spec.image_count(), a.out.display());
    let manifest = generate_to_dir(&spec, &a.out, a.workers)
        .with_context(|| format!("writing dataset to {}", a.out.display()))?;
    println!("{} images, manifest {}", manifest.len(), a.out.join(MANIFEST_FILE).display());
    Ok(ExitCode::SUCCESS)
}
