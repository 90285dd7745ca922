use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use gridcoal::scenario::SyntheticSpec;
use gridcoal::{generate_synthetic, run, OptimizerConfig};

fn bench_default_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("memetic_run_default_config");
    for n in [10usize, 50] {
        let scenario = generate_synthetic(&SyntheticSpec::new(n, 42)).unwrap();
        let cfg = OptimizerConfig::default();
        group.bench_function(format!("n{n}"), |b| {
            b.iter(|| run(black_box(&scenario), black_box(&cfg)).unwrap())
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive_oracle");
    group.sample_size(20);
    for n in [10usize, 16] {
        let scenario = generate_synthetic(&SyntheticSpec::new(n, 42)).unwrap();
        group.bench_function(format!("n{n}"), |b| {
            b.iter(|| gridcoal::solve_exhaustive(black_box(&scenario), 0.5, 22, 10).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_default_run, bench_oracle);
criterion_main!(benches);
