//! Benchmarks for the numerical kernels: mass evaluation routes, the
//! error curve and its derivative, cutoff optimization, and the Monte
//! Carlo pipeline.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use twomeans::{
    lloyd, minimize_cutoff, mse, sample_spheres, Cutoff, Initialization, ProjectedMeasure,
};

fn cut(a: f64) -> Cutoff {
    Cutoff::new(a).unwrap()
}

fn bench_mass_routes(c: &mut Criterion) {
    let quadrature_backed = ProjectedMeasure::new(6).unwrap();
    let closed_form = ProjectedMeasure::new(3).unwrap();
    c.bench_function("mass quadrature (n = 6)", |b| {
        b.iter(|| quadrature_backed.mass_minus_quadrature(black_box(cut(0.7))))
    });
    c.bench_function("mass closed form (n = 3)", |b| {
        b.iter(|| closed_form.mass_minus(black_box(cut(0.7))))
    });
    c.bench_function("mass series (n = 6, a = 1.5)", |b| {
        b.iter(|| quadrature_backed.mass_series(black_box(cut(1.5))).unwrap())
    });
}

fn bench_error_curve(c: &mut Criterion) {
    let measure = ProjectedMeasure::new(4).unwrap();
    c.bench_function("total error (n = 4)", |b| {
        b.iter(|| mse::total(&measure, black_box(cut(0.8))))
    });
    c.bench_function("derivative (n = 4)", |b| {
        b.iter(|| mse::derivative(&measure, black_box(cut(0.8))).unwrap())
    });
    c.bench_function("planar closed form", |b| {
        b.iter(|| mse::planar_closed_form(black_box(cut(0.3))))
    });
}

fn bench_optimizer(c: &mut Criterion) {
    c.bench_function("minimize cutoff (n = 4)", |b| {
        b.iter(|| minimize_cutoff(black_box(4), black_box(1e-8)).unwrap())
    });
    c.bench_function("minimize cutoff (n = 2)", |b| {
        b.iter(|| minimize_cutoff(black_box(2), black_box(1e-8)).unwrap())
    });
}

fn bench_empirical(c: &mut Criterion) {
    c.bench_function("sample 10k points (n = 3)", |b| {
        b.iter(|| sample_spheres(black_box(3), black_box(10_000), black_box(7)).unwrap())
    });
    let cloud = sample_spheres(3, 10_000, 7).unwrap();
    c.bench_function("lloyd 10k points (n = 3)", |b| {
        b.iter(|| lloyd(&cloud, Initialization::Antipodal, 100, 1e-9).unwrap())
    });
}

criterion_group!(
    kernels,
    bench_mass_routes,
    bench_error_curve,
    bench_optimizer,
    bench_empirical
);
criterion_main!(kernels);
