use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fingersynth_bench::{sample_impression, sample_template};
use fingersynth_core::masterprint::{synthesize_master, MasterPrintParams};
use fingersynth_core::minutiae::minutiae_from_image;
use fingersynth_core::{derive_rng, match_minutiae, FingerClass};

fn matching(c: &mut Criterion) {
    let a = sample_template(1, 3, 1);
    let mated = sample_template(1, 3, 2);
    let other = sample_template(2, 7, 1);
    c.bench_function("match_mated", |b| b.iter(|| match_minutiae(black_box(&a), black_box(&mated))));
    c.bench_function("match_nonmated", |b| b.iter(|| match_minutiae(black_box(&a), black_box(&other))));
}

fn extraction(c: &mut Criterion) {
    let img = sample_impression(1, 3, 1);
    c.bench_function("extract_minutiae", |b| b.iter(|| minutiae_from_image(black_box(&img))));
}

fn synthesis(c: &mut Criterion) {
    let class = FingerClass::new(5).unwrap();
    let mut g = c.benchmark_group("synthesis");
    g.sample_size(10);
    g.bench_function("master_print", |b| {
        b.iter(|| {
            let mut rng = derive_rng(99, 1, class, 0);
            let params = MasterPrintParams::sample(class, &mut rng);
            synthesize_master(&params, class, &mut rng).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, matching, extraction, synthesis);
criterion_main!(benches);
