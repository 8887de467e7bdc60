use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use histm_bench::machine;
use histm_core::corpus::UTM_BB2_INPUT;
use histm_core::{run_direct, run_kernel, SimError};

fn bb3_and_utm(c: &mut Criterion) {
    let mut group = c.benchmark_group("halting");
    for (name, input) in [("bb3", ""), ("utm", UTM_BB2_INPUT)] {
        let m = machine(name);
        let input = m.encode_input(input).unwrap();
        group.bench_with_input(BenchmarkId::new("direct", name), &input, |b, i| {
            b.iter(|| black_box(run_direct(&m, i, 1_000_000).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("kernel", name), &input, |b, i| {
            b.iter(|| black_box(run_kernel(&m, i, 1_000_000).unwrap()))
        });
    }
    group.finish();
}

fn revisit(c: &mut Criterion) {
    let m = machine("revisit");
    let mut group = c.benchmark_group("revisit");
    group.sample_size(20);
    for steps in [1u64 << 10, 1 << 14, 1 << 18] {
        group.bench_with_input(BenchmarkId::new("kernel", steps), &steps, |b, &n| {
            b.iter(|| match run_kernel(&m, &[], n) {
                Err(SimError::StepLimitExceeded(t)) => black_box(t.len()),
                other => panic!("revisit should not halt: {other:?}"),
            })
        });
        group.bench_with_input(BenchmarkId::new("direct", steps), &steps, |b, &n| {
            b.iter(|| match run_direct(&m, &[], n) {
                Err(SimError::StepLimitExceeded(t)) => black_box(t.len()),
                other => panic!("revisit should not halt: {other:?}"),
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bb3_and_utm, revisit);
criterion_main!(benches);
