//! Sequential versus rayon execution of the three parallel hot paths.
//!
//! Run with `cargo bench -p evosplit-core`. Without the `parallel` feature
//! both variants take the sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use evosplit_core::synthetic::{generate, random_tiny, SyntheticConfig};
use evosplit_core::{
    exhaustive_optimal, random_split, run_best_of, EaParams, Execution, FoldSpec, Metric, SplitEvaluator,
};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn population_evaluation(c: &mut Criterion) {
    let d = generate(&SyntheticConfig::imbalanced(2000, 24, 10, 1));
    let spec = FoldSpec::equal(10, 2000).unwrap();
    let ev = SplitEvaluator::new(&d);
    let population: Vec<_> = (0..200).map(|s| random_split(2000, &spec, s)).collect();

    let mut group = c.benchmark_group("population_evaluation");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(&population, |a| ev.objectives(black_box(a), 10)))
        });
    }
    group.finish();
}

fn oracle_enumeration(c: &mut Criterion) {
    // 12 examples into folds of 4: 34 650 assignments.
    let d = random_tiny(12, 4, 3);
    let spec = FoldSpec::equal(3, 12).unwrap();

    let mut group = c.benchmark_group("oracle_enumeration");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exhaustive_optimal(black_box(&d), &spec, Metric::LdPrime, exec).unwrap())
        });
    }
    group.finish();
}

fn best_of_runs(c: &mut Criterion) {
    let d = generate(&SyntheticConfig::imbalanced(400, 12, 10, 2));
    let spec = FoldSpec::equal(10, 400).unwrap();

    let mut group = c.benchmark_group("run_best_of");
    group.sample_size(10);
    for (name, execution) in POLICIES {
        let params = EaParams {
            execution,
            max_generations: Some(20),
            ..EaParams::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_best_of(black_box(&d), &spec, &params).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, population_evaluation, oracle_enumeration, best_of_runs);
criterion_main!(benches);
