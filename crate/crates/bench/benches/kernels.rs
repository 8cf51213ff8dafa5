use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rotorgw::srw_gamma::CdfOperator;
use rotorgw::*;

fn arena(law: &str, seed: u64) -> TreeArena {
    let dist = OffspringDistribution::parse(law).unwrap();
    let q = Arc::new(RotorMatrix::uniform(dist.k_max()));
    TreeArena::with_matrix(dist, q, seed).unwrap()
}

fn escape(c: &mut Criterion) {
    c.bench_function("escape_count ternary n=1e4 H=16", |b| {
        b.iter_batched(
            || arena("p3=1", 7),
            |mut a| escape_count(&mut a, black_box(10_000), 16).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn frontier(c: &mut Criterion) {
    c.bench_function("build_frontier p2/p4 n=2^14", |b| {
        b.iter_batched(
            || arena("p2=1/2,p4=1/2", 3),
            |mut a| build_frontier(&mut a, black_box(1 << 14)).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn hitting(c: &mut Criterion) {
    let mut a = arena("p1=1/4,p3=3/4", 5);
    a.truncate_view(12).unwrap();
    let sink = SinkSet::level(12);
    c.bench_function("solve_hitting depth 12", |b| b.iter(|| solve_hitting(&mut a, black_box(&sink)).unwrap()));
    let dist = a.distribution().clone();
    c.bench_function("keyed_gamma_bounds depth 12", |b| b.iter(|| keyed_gamma_bounds(&dist, black_box(5), 12)));
}

fn cdf(c: &mut Criterion) {
    let dist = OffspringDistribution::parse("p1=1/2,p3=1/2").unwrap();
    let op = CdfOperator::new(&dist, 4096).unwrap();
    let f = DiscretizedCDF::uniform(4096);
    c.bench_function("cdf operator grid 4096", |b| b.iter(|| op.apply(black_box(&f)).unwrap()));
}

criterion_group!(benches, escape, frontier, hitting, cdf);
criterion_main!(benches);
