use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spartan_core::simulate::{estimate_stats, simulate_field};
use spartan_core::{Model, SsrfParams};

fn model() -> Model {
    Model::Ssrf(SsrfParams::planar(1.0, 1.0, 4.0).unwrap())
}

fn bench_simulate(c: &mut Criterion) {
    let m = model();
    let mut group = c.benchmark_group("simulate_field");
    group.sample_size(20);
    for n in [128, 256, 512] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| simulate_field(&m, n, 1.0, black_box(7)).unwrap())
        });
    }
    group.finish();
}

fn bench_stats(c: &mut Criterion) {
    let m = model();
    let fields: Vec<_> = (0..4).map(|s| simulate_field(&m, 256, 1.0, s).unwrap()).collect();
    let mut group = c.benchmark_group("estimate_stats");
    group.sample_size(20);
    group.bench_function("4x256", |b| b.iter(|| estimate_stats(black_box(&fields), 40.0, None).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_simulate, bench_stats);
criterion_main!(benches);
