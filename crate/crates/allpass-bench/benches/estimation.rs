use allpass::dispersion::dispersion;
use allpass::estimation::{fit, FitOptions};
use allpass::pipeline::sample_acf;
use allpass::residuals::{residual_gradient, residuals, AllPassParams};
use allpass::weights::WeightFunction;
use allpass_bench::fixture;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn bench_residuals(c: &mut Criterion) {
    let mut group = c.benchmark_group("residuals");
    for n in [500usize, 5000] {
        let sim = fixture(&[0.3, 0.4], n);
        let params = AllPassParams::new(vec![0.25, 0.35]).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| residuals(black_box(&params), black_box(&sim.x)).unwrap())
        });
    }
    group.finish();
}

fn bench_dispersion(c: &mut Criterion) {
    let mut group = c.benchmark_group("dispersion");
    let w = WeightFunction::wilcoxon();
    for n in [500usize, 5000] {
        let sim = fixture(&[0.5], n);
        let params = AllPassParams::new(vec![0.4]).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| dispersion(black_box(&params), black_box(&sim.x), &w).unwrap())
        });
    }
    group.finish();
}

fn bench_gradient(c: &mut Criterion) {
    let sim = fixture(&[0.3, 0.4], 2000);
    let params = AllPassParams::new(vec![0.25, 0.35]).unwrap();
    c.bench_function("residual_gradient/2000", |b| {
        b.iter(|| residual_gradient(black_box(&params), black_box(&sim.x)).unwrap())
    });
}

fn bench_acf(c: &mut Criterion) {
    let sim = fixture(&[0.5], 10_000);
    c.bench_function("sample_acf/10000x40", |b| {
        b.iter(|| sample_acf(black_box(&sim.x), 40).unwrap())
    });
}

fn bench_fit(c: &mut Criterion) {
    let sim = fixture(&[0.5], 500);
    let w = WeightFunction::wilcoxon();
    let opts = FitOptions {
        n_starts: 200,
        n_refine: 6,
        ..FitOptions::with_seed(7)
    };
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    group.bench_function("n500_p1_200starts", |b| {
        b.iter(|| fit(black_box(&sim.x), 1, &w, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_residuals,
    bench_dispersion,
    bench_gradient,
    bench_acf,
    bench_fit
);
criterion_main!(benches);
