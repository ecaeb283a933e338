use cics_bench::{chain, chains, instance, mdp};
use cics_core::{brute_force_opt, curve_of, index_policy_value, mdp_surrogate, random, water_fill, Method, Mode};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn amortization(c: &mut Criterion) {
    let mut g = c.benchmark_group("water_fill");
    for depth in [3, 5, 7] {
        let ch = chain(1, depth, 3);
        g.bench_with_input(BenchmarkId::from_parameter(depth), &ch, |b, ch| {
            b.iter(|| water_fill(black_box(ch), Mode::Min));
        });
    }
    g.finish();

    let mut g = c.benchmark_group("mdp_surrogate");
    for depth in [2, 3, 4] {
        let m = mdp(2, depth, 2, 3);
        g.bench_with_input(BenchmarkId::from_parameter(depth), &m, |b, m| {
            b.iter(|| mdp_surrogate(black_box(m), Mode::Min).unwrap());
        });
    }
    g.finish();
}

fn curves(c: &mut Criterion) {
    let d = random::dist(&mut cics_bench::rng(3), 200, 100.0);
    c.bench_function("curve_of/200", |b| b.iter(|| curve_of(black_box(&d), Mode::Max)));
}

fn selection(c: &mut Criterion) {
    let mut g = c.benchmark_group("index_policy_exact");
    for n in [2, 4, 6] {
        let (cs, m) = chains(4, n, n / 2, 2);
        g.bench_with_input(BenchmarkId::from_parameter(n), &(cs, m), |b, (cs, m)| {
            b.iter(|| index_policy_value(black_box(cs), m, Mode::Min, Method::Exact).unwrap());
        });
    }
    g.finish();

    let (cs, m) = chains(5, 8, 3, 3);
    c.bench_function("index_policy_mc/8x1000", |b| {
        b.iter(|| index_policy_value(&cs, &m, Mode::Min, Method::MonteCarlo { seed: 1, reps: 1000 }).unwrap());
    });

    let mut g = c.benchmark_group("brute_force_opt");
    g.sample_size(10);
    for n in [2, 3] {
        let inst = instance(6, n, 1, Mode::Min);
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| brute_force_opt(black_box(inst)).unwrap());
        });
    }
    g.finish();
}

criterion_group!(benches, amortization, curves, selection);
criterion_main!(benches);
