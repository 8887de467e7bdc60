use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use histm_bench::filled_store;

fn read_latest(c: &mut Criterion) {
    let mut group = c.benchmark_group("read_latest");
    for writes in [1u64 << 8, 1 << 12, 1 << 16, 1 << 20] {
        // Two hot cells, so each holds writes / 2 entries.
        let store = filled_store(2, writes);
        group.bench_with_input(BenchmarkId::from_parameter(writes), &store, |b, store| {
            let mut t = 0u64;
            b.iter(|| {
                t = (t + 7919) % writes;
                black_box(store.read_latest(black_box(1), t).unwrap())
            })
        });
    }
    group.finish();
}

fn append_write(c: &mut Criterion) {
    c.bench_function("append_write/65536", |b| {
        b.iter(|| black_box(filled_store(16, 1 << 16)))
    });
}

criterion_group!(benches, read_latest, append_write);
criterion_main!(benches);
