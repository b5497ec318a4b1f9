use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ierk_bench::{grid, state, velocity_of, vorticity, SIZES};
use ierk_core::spectral::{convection, solve_poisson};
use ierk_core::tableaux::{ierk23, ierk47};
use ierk_core::{ierk_step, ConvectionForm, Field, Problem};

fn transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for m in SIZES {
        let g = grid(m);
        let w = vorticity(&g);
        let values = w.physical().to_vec();
        let coeffs = w.spectral().to_vec();
        group.bench_with_input(BenchmarkId::new("forward", m), &m, |b, _| {
            b.iter(|| Field::from_physical(&g, black_box(values.clone())).to_spectral())
        });
        group.bench_with_input(BenchmarkId::new("inverse", m), &m, |b, _| {
            b.iter(|| Field::from_spectral(&g, black_box(coeffs.clone())).to_physical())
        });
        group.bench_with_input(BenchmarkId::new("poisson", m), &m, |b, _| {
            b.iter(|| solve_poisson(black_box(&w)).unwrap())
        });
    }
    group.finish();
}

fn convection_forms(c: &mut Criterion) {
    let mut group = c.benchmark_group("convection");
    for m in SIZES {
        let g = grid(m);
        let w = vorticity(&g);
        let vel = velocity_of(&w);
        for (name, form) in [("skew", ConvectionForm::Skew), ("advective", ConvectionForm::Advective)] {
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| {
                b.iter(|| convection(black_box(&vel), black_box(&w), form).unwrap())
            });
        }
    }
    group.finish();
}

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("ierk_step");
    group.sample_size(20);
    for m in SIZES {
        let g = grid(m);
        let s = state(&g);
        let prob = Problem::new(g.clone(), 0.5).unwrap();
        for tab in [ierk23(0.35).unwrap(), ierk47(-0.8).unwrap()] {
            group.bench_with_input(BenchmarkId::new(tab.label(), m), &m, |b, _| {
                b.iter(|| ierk_step(black_box(&s), &prob, &tab, 0.01).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, transform, convection_forms, step);
criterion_main!(benches);
