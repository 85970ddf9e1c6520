use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use incusim::engine::{self, SimConfig};
use incusim::exec::Execution;
use std::hint::black_box;

fn strategies() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel),
    ]
}

fn band_sweep(c: &mut Criterion) {
    let mut base = SimConfig::default();
    base.sim.duration = 60.0;
    let values: Vec<f64> = (1..=8).map(|i| 0.05 * i as f64).collect();

    let mut group = c.benchmark_group("sweep_t_hyst");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| engine::sweep_with(black_box(&base), "control.t_hyst", &values, exec).unwrap())
        });
    }
    group.finish();
}

fn seed_batch(c: &mut Criterion) {
    let configs: Vec<SimConfig> = (0..16)
        .map(|seed| {
            let mut cfg = SimConfig::default();
            cfg.sim.duration = 30.0;
            cfg.sim.seed = seed;
            cfg
        })
        .collect();

    let mut group = c.benchmark_group("seed_batch");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| engine::run_batch(black_box(&configs), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, band_sweep, seed_batch);
criterion_main!(benches);
