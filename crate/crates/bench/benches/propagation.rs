use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use qnn_bench::{named_state, set1_schedule, set2_pair};
use qnn_core::hamiltonian::build_hamiltonian;
use qnn_core::learning::{self, bundled as datasets, GradientEngine};
use qnn_core::propagator::rk4_step;
use qnn_core::{evolve, evolve_expm, IntegratorConfig, Recording};

fn propagation(c: &mut Criterion) {
    let s = set1_schedule();
    let rho = named_state("GHZ_minus");
    let cfg = IntegratorConfig::default();
    let h = build_hamiltonian(&s.chunks[0], s.convention);

    c.bench_function("rk4_step", |b| b.iter(|| rk4_step(&rho, &h, cfg.dt)));

    let mut g = c.benchmark_group("evolve_300ns");
    g.sample_size(20).measurement_time(Duration::from_secs(5));
    g.bench_function("rk4", |b| b.iter(|| evolve(&rho, &s, &cfg, Recording::Off).unwrap()));
    g.bench_function("rk4_recording_stages", |b| b.iter(|| evolve(&rho, &s, &cfg, Recording::Stages).unwrap()));
    g.bench_function("expm", |b| b.iter(|| evolve_expm(&rho, &s)));
    g.finish();
}

fn gradients(c: &mut Criterion) {
    let s = set1_schedule();
    let pair = set2_pair("GHZ_minus");
    let cfg = IntegratorConfig::default();

    let mut g = c.benchmark_group("gradient");
    g.sample_size(10).measurement_time(Duration::from_secs(5));
    g.bench_function("stepwise_adjoint", |b| b.iter(|| learning::backprop_gradient(&pair, &s, &cfg).unwrap()));
    g.bench_function("spectral", |b| b.iter(|| learning::spectral_gradient(&pair, &s, &cfg).unwrap()));
    g.finish();

    let ds = datasets::set2();
    let mut g = c.benchmark_group("set2_epoch");
    g.sample_size(10).measurement_time(Duration::from_secs(10));
    for (name, engine) in [("stepwise", GradientEngine::Stepwise), ("spectral", GradientEngine::Spectral)] {
        g.bench_function(name, |b| b.iter(|| learning::batch_gradient(&ds, &s, &cfg, engine).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, propagation, gradients);
criterion_main!(benches);
