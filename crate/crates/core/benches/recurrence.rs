use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use hitstat::estimators::{draw_sample, EstimationPlan};
use hitstat::par;
use hitstat::source::{MarkovSpec, SourceSpec};
use hitstat::symbolic::{hitting_time, Pattern};

fn source() -> SourceSpec {
    SourceSpec::markov(MarkovSpec::bernoulli(&[0.7, 0.3]).unwrap(), 3)
}

fn scanner(c: &mut Criterion) {
    let src = source();
    // A pattern that is never found, so every call scans the full budget.
    let pattern = Pattern::from_digits(&"1".repeat(40)).unwrap();
    let budget = 1 << 22;
    let mut group = c.benchmark_group("scan");
    group.throughput(Throughput::Elements(budget));
    group.bench_function("hitting_time_4M", |b| {
        b.iter(|| {
            let mut y = src.stream(1, budget).unwrap();
            black_box(hitting_time(&pattern, &mut y).unwrap())
        })
    });
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let plan = EstimationPlan::new(source(), vec![8, 12, 16], 2_000, 1_000_000);
    let mut group = c.benchmark_group("sample_recurrence");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", plan.samples), &plan, |b, plan| {
        b.iter(|| black_box(par::map_indexed(plan.samples, |i| draw_sample(plan, i).unwrap())))
    });
    group.bench_with_input(BenchmarkId::new("sequential", plan.samples), &plan, |b, plan| {
        b.iter(|| black_box(par::map_indexed_sequential(plan.samples, |i| draw_sample(plan, i).unwrap())))
    });
    group.finish();
}

criterion_group!(benches, scanner, sampling);
criterion_main!(benches);
