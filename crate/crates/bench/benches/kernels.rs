use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gradwave::oscillator::{linspace, verify_pointwise_bounds};
use gradwave::{etd2_weight, kernels, RegimeCutoffs};

fn kernel_branches(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernels");
    for (name, beta) in [("overdamped", 0.3), ("critical", 0.5), ("underdamped", 3.0), ("small", 1e-4)] {
        g.bench_function(name, |b| b.iter(|| kernels(black_box(7.5), black_box(beta))));
    }
    g.bench_function("etd2_weight", |b| b.iter(|| etd2_weight(black_box(0.5), black_box(0.7))));
    g.finish();
}

fn bound_sweep(c: &mut Criterion) {
    let t = linspace(0.0, 100.0, 100);
    let beta = linspace(0.0, 100.0, 100);
    let cut = RegimeCutoffs::default();
    c.bench_function("pointwise_bounds_100x100", |b| {
        b.iter(|| verify_pointwise_bounds(&cut, black_box(&t), black_box(&beta)))
    });
}

criterion_group!(benches, kernel_branches, bound_sweep);
criterion_main!(benches);
