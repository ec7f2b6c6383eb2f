use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use klab::ring_linalg::{howell_form, smith, ResidueRing};
use klab::selmer_instance::{check_instance, generate_instance, GenParams};
use klab::suites::{appendix, case_rng};
use klab::systems::{kolyvagin_modules, stark_module};

fn linear_algebra(c: &mut Criterion) {
    let ring = ResidueRing::new(5, 3).unwrap();
    let a = appendix::random_invertible(ring, 8, &mut case_rng(1, 0)).scale(5);
    c.bench_function("howell_form 8x8 mod 125", |b| b.iter(|| howell_form(black_box(&a))));
    c.bench_function("smith 8x8 mod 125", |b| b.iter(|| smith(black_box(&a))));
}

fn systems(c: &mut Criterion) {
    let inst = generate_instance(&GenParams { p: 3, k: 2, r: 2, m: 4, e: vec![1, 1], seed: 5, levels: None }).unwrap();
    let all = inst.all_primes();
    let mut g = c.benchmark_group("instance p=3 k=2 r=2 m=4");
    g.sample_size(10);
    g.bench_function("check_instance", |b| b.iter(|| check_instance(black_box(&inst), all)));
    g.bench_function("stark_module", |b| b.iter(|| stark_module(black_box(&inst), all).unwrap()));
    g.bench_function("kolyvagin_modules", |b| b.iter(|| kolyvagin_modules(black_box(&inst), all).unwrap()));
    g.finish();
}

criterion_group!(benches, linear_algebra, systems);
criterion_main!(benches);
