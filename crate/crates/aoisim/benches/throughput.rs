//! Criterion benchmarks: raw slot throughput of a single run, and the
//! sweep runner with rayon fan-out versus the sequential fallback.
//!
//! Run with `cargo bench`. The sweep workload is deliberately small so the
//! parallel/sequential comparison reflects scheduling overhead rather than
//! saturating the machine for minutes.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use aoisim::harness::{preset, run_experiment_detailed_sequential, run_single, RunSetup};
use aoisim::policy::{Policy, TieBreak};

#[cfg(feature = "parallel")]
use aoisim::harness::run_experiment_detailed;

fn single_run_throughput(c: &mut Criterion) {
    let mut config = preset("fig5").expect("preset exists");
    config.horizon = 100_000;
    config.warmup = Some(10_000);
    let setup = RunSetup::from_config(&config);

    let mut group = c.benchmark_group("single_run");
    group.sample_size(20);
    group.throughput(criterion::Throughput::Elements(config.horizon));
    group.bench_function("selfish_100k_slots", |b| {
        b.iter(|| {
            run_single(
                black_box(&setup),
                Policy::selfish(1.0, 1.0, TieBreak::UniformRandom),
                None,
                7,
                None,
            )
            .expect("run succeeds")
        })
    });
    group.finish();
}

fn sweep_modes(c: &mut Criterion) {
    let mut config = preset("fig5").expect("preset exists");
    config.horizon = 25_000;
    config.warmup = Some(2_500);
    config.replications = 4;
    config.betas = vec![0.5, 5.0];
    config.gammas = vec![1.0];

    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);

    group.bench_with_input(BenchmarkId::new("sequential", "2x1x4"), &config, |b, cfg| {
        b.iter(|| run_experiment_detailed_sequential(black_box(cfg)).expect("run succeeds"))
    });

    #[cfg(feature = "parallel")]
    group.bench_with_input(BenchmarkId::new("parallel", "2x1x4"), &config, |b, cfg| {
        b.iter(|| run_experiment_detailed(black_box(cfg)).expect("run succeeds"))
    });

    group.finish();
}

criterion_group!(benches, single_run_throughput, sweep_modes);
criterion_main!(benches);
