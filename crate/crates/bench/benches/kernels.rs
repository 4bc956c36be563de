use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use fpspec_core::evolution::CnStepper;
use fpspec_core::*;

fn figure_setup() -> (Kernel, Grid, Weight) {
    (Kernel::dirac_pair(2.0, 2.0), Grid::default_figure(), Weight::new(1.0).unwrap())
}

fn cn_step(c: &mut Criterion) {
    let (k, g, _) = figure_setup();
    let stepper = CnStepper::new(&k, &g, 1e-3).unwrap();
    let f = hermite_mu(1, &g).unwrap();
    c.bench_function("cn_step_1501", |b| b.iter(|| stepper.step(black_box(&f), false).unwrap()));
}

fn line_transforms(c: &mut Criterion) {
    let (_, g, _) = figure_setup();
    let f = hermite_mu(2, &g).unwrap();
    c.bench_function("line_transform_1501", |b| b.iter(|| line_transform(black_box(&f), 0.5)));
}

fn resolvent_small(c: &mut Criterion) {
    let (k, _, w) = figure_setup();
    let g = Grid::symmetric(12.0, 361).unwrap();
    let s = build_spectral_set(&k, &w, &g, 1).unwrap();
    let q = ResolventQuery::new(Complex64::new(1.0, 0.0), 1, s.eigenfunction(1).unwrap().clone());
    let mut group = c.benchmark_group("resolvent");
    group.sample_size(10);
    group.bench_function("resolvent_361", |b| b.iter(|| resolvent(&s, black_box(&q)).unwrap()));
    group.finish();
}

criterion_group!(benches, cn_step, line_transforms, resolvent_small);
criterion_main!(benches);
