use criterion::{criterion_group, criterion_main, Criterion};
use ggredux_bench::molecule_like;
use ggredux_core::metrics::{descriptor, mmd, nspdk_features_all, orbit_counts, DescriptorKind, KernelConfig, NspdkConfig};
use std::hint::black_box;

fn bench_metrics(c: &mut Criterion) {
    let a = molecule_like(4, 128);
    let b = molecule_like(5, 128);

    c.bench_function("orbit_counts/128", |bench| {
        bench.iter(|| a.iter().map(|g| orbit_counts(black_box(g)).len()).sum::<usize>())
    });
    let da: Vec<_> = a.iter().map(|g| descriptor(g, DescriptorKind::Degree)).collect();
    let db: Vec<_> = b.iter().map(|g| descriptor(g, DescriptorKind::Degree)).collect();
    c.bench_function("mmd/degree/128", |bench| {
        bench.iter(|| mmd(black_box(&da), &db, &KernelConfig::default()).unwrap())
    });
    c.bench_function("nspdk_features/128", |bench| {
        bench.iter(|| nspdk_features_all(black_box(&a), &NspdkConfig::default()).len())
    });
}

criterion_group!(benches, bench_metrics);
criterion_main!(benches);
