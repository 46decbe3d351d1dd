use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use latgate_perf::{basis, couplings};
use latgate_core::{assemble, evolve_schedule, expm_propagator, Multipliers, PulseSchedule, PulseShape, StepControl};

fn hamiltonian(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for sites in [2, 3, 4] {
        let b = basis(sites);
        let k = couplings(sites);
        g.bench_with_input(BenchmarkId::from_parameter(b.dim()), &sites, |bench, _| {
            bench.iter(|| assemble(black_box(&k), &b).unwrap())
        });
    }
    g.finish();
}

fn propagator(c: &mut Criterion) {
    let mut g = c.benchmark_group("expm");
    for sites in [2, 3, 4] {
        let b = basis(sites);
        let h = assemble(&couplings(sites), &b).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(b.dim()), &sites, |bench, _| {
            bench.iter(|| expm_propagator(black_box(&h), 10.0).unwrap())
        });
    }
    g.finish();
}

fn ramped(c: &mut Criterion) {
    let b = basis(2);
    let k = couplings(2);
    let sch = PulseSchedule::single(100.0, PulseShape::SmoothRamp { ramp_fraction: 0.1 }, Multipliers::ALL).unwrap();
    let mut g = c.benchmark_group("smooth_ramp");
    for steps in [64, 256, 1024] {
        g.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |bench, &n| {
            bench.iter(|| evolve_schedule(&k, &sch, &b, StepControl::Fixed(n)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, hamiltonian, propagator, ramped);
criterion_main!(benches);
