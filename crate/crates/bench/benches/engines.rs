use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orbit_census::census::{best_census, best_cluster_size, brute_census};
use orbit_census::spectral::{fourier_cluster_size_on, fourier_moment, validate_all, TraceGrid};
use orbit_census_bench::admissible;

fn census_engines(c: &mut Criterion) {
    let mut g = c.benchmark_group("census");
    g.sample_size(10);
    for n in [14u32, 18] {
        g.bench_with_input(BenchmarkId::new("brute", n), &n, |b, &n| {
            b.iter(|| brute_census(n, 3).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("best", n), &n, |b, &n| {
            b.iter(|| best_census(n, 3).unwrap())
        });
    }
    g.bench_function("best/n70_p3", |b| b.iter(|| best_census(70, 3).unwrap()));
    g.finish();
}

fn cluster_size(c: &mut Criterion) {
    let vectors = admissible(40, 3);
    let v = &vectors[vectors.len() / 2];
    c.bench_function("best_cluster_size/n40_p3", |b| {
        b.iter(|| best_cluster_size(black_box(v)).unwrap())
    });
}

fn fourier(c: &mut Criterion) {
    let mut g = c.benchmark_group("fourier");
    g.sample_size(10);
    let vectors = admissible(16, 2);
    let grid = TraceGrid::new(16, 2, 17, false).unwrap();
    g.bench_function("cluster_size/n16_p2", |b| {
        b.iter(|| fourier_cluster_size_on(&grid, black_box(&vectors[vectors.len() / 2])).unwrap())
    });
    g.bench_function("z2/n14_p3", |b| {
        b.iter(|| fourier_moment(14, 3, 2, 15).unwrap())
    });
    g.finish();
}

fn validation(c: &mut Criterion) {
    let mut g = c.benchmark_group("validate_all");
    g.sample_size(10);
    for p in [2u32, 3, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| validate_all(p).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, census_engines, cluster_size, fourier, validation);
criterion_main!(benches);
