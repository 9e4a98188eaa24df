use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use longrun::mgf::{log_mgf, log_mgf_recursive};
use longrun::montecarlo::coverage_experiment;
use longrun::{distribution, log_prob_no_run, BernoulliModel, IntervalMethod, SimulationConfig};

fn full_law(c: &mut Criterion) {
    let mut group = c.benchmark_group("distribution");
    group.sample_size(10);
    for &(n, p) in &[(1_000usize, 0.5), (10_000, 0.5), (5_000, 0.95)] {
        let model = BernoulliModel::new(p).unwrap();
        group.bench_with_input(BenchmarkId::new(format!("p={p}"), n), &n, |b, &n| {
            b.iter(|| distribution(black_box(n), &model).unwrap())
        });
    }
    group.finish();
}

fn single_threshold(c: &mut Criterion) {
    let model = BernoulliModel::new(0.5).unwrap();
    let mut group = c.benchmark_group("single_k");
    // small k (windowed recursion), moderate k (ratio recurrence), far tail (series)
    for &k in &[3usize, 20, 60] {
        group.bench_with_input(BenchmarkId::new("n=1e6", k), &k, |b, &k| {
            b.iter(|| log_prob_no_run(1_000_000, black_box(k), &model).unwrap())
        });
    }
    group.finish();
}

fn mgf(c: &mut Criterion) {
    let model = BernoulliModel::new(0.5).unwrap();
    let law = distribution(200, &model).unwrap();
    let mut group = c.benchmark_group("log_mgf");
    group.bench_function("exact n=200", |b| b.iter(|| log_mgf(&law, black_box(0.5))));
    group.sample_size(10);
    group.bench_function("recursion n=200", |b| {
        b.iter(|| log_mgf_recursive(200, &model, black_box(0.5)).unwrap())
    });
    group.finish();
}

fn coverage(c: &mut Criterion) {
    let config = SimulationConfig {
        p: 0.98,
        n: 200,
        alpha: 0.05,
        replications: 2_000,
        master_seed: 1,
        methods: IntervalMethod::ALL.to_vec(),
    };
    let mut group = c.benchmark_group("coverage");
    group.sample_size(10);
    group.bench_function("2000 reps n=200", |b| {
        b.iter(|| coverage_experiment(black_box(&config)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, full_law, single_threshold, mgf, coverage);
criterion_main!(benches);
