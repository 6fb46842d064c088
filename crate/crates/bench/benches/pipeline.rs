use std::hint::black_box;

use boa_bench::{database, frames, ranking, rng};
use boa_core::eval::average_precision;
use boa_core::retrieval::rank;
use boa_core::{encode_video, pool, PoolingMode, Provenance};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn pooling(c: &mut Criterion) {
    let mut group = c.benchmark_group("pool");
    let m = frames(&mut rng(1), 120, 1000);
    for mode in [PoolingMode::Max, PoolingMode::Avg, PoolingMode::Sum] {
        group.bench_with_input(BenchmarkId::from_parameter(mode), &mode, |b, &mode| {
            b.iter(|| pool(black_box(&m), mode).unwrap())
        });
    }
    group.finish();
    c.bench_function("encode_video/default", |b| {
        b.iter(|| encode_video(black_box(&m), Provenance::default()).unwrap())
    });
}

fn ranking_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank");
    for size in [150, 2500] {
        let mut r = rng(2);
        let db = database(&mut r, size, 1000);
        let query = db[0].1.clone();
        group.bench_with_input(BenchmarkId::from_parameter(size), &db, |b, db| {
            b.iter(|| rank("q", black_box(&query), db).unwrap())
        });
    }
    group.finish();
}

fn ap(c: &mut Criterion) {
    let flags = ranking(&mut rng(3), 2500, 60);
    c.bench_function("average_precision/2500", |b| {
        b.iter(|| average_precision(black_box(&flags), 60).unwrap())
    });
}

criterion_group!(benches, pooling, ranking_bench, ap);
criterion_main!(benches);
