use criterion::{criterion_group, criterion_main, Criterion};
use macq_core::bounds::{claimed_bound_analytic, claimed_bound_combinatorial, Factor};
use macq_core::engine::{default_round_cap, worst_case_rounds, DEFAULT_ENUMERATION_BUDGET};
use macq_core::{build_tree, exact_optimal_rounds, normalize, GameConfig, OracleLimits, TreeSplit};
use std::hint::black_box;

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for (n, d) in [(5, 2), (6, 2), (6, 3)] {
        let config = GameConfig::new(n, d).unwrap();
        group.bench_function(format!("f({n},{d})"), |b| {
            b.iter(|| exact_optimal_rounds(black_box(config), OracleLimits::default()).unwrap())
        });
    }
    group.finish();
}

fn trees(c: &mut Criterion) {
    let config = GameConfig::new(10, 3).unwrap();
    c.bench_function("build_tree tree n=10 d=3", |b| {
        b.iter(|| build_tree(&TreeSplit, black_box(config), DEFAULT_ENUMERATION_BUDGET).unwrap())
    });
    c.bench_function("normalize tree n=10 d=3", |b| {
        b.iter(|| normalize(&TreeSplit, black_box(config), DEFAULT_ENUMERATION_BUDGET).unwrap())
    });
    let config = GameConfig::new(16, 4).unwrap();
    c.bench_function("worst_case tree n=16 d=4", |b| {
        b.iter(|| {
            worst_case_rounds(&TreeSplit, black_box(config), default_round_cap(&config), DEFAULT_ENUMERATION_BUDGET)
                .unwrap()
        })
    });
}

fn bounds(c: &mut Criterion) {
    c.bench_function("claimed_bound_analytic(2^20, 8)", |b| {
        b.iter(|| claimed_bound_analytic(black_box(1 << 20), 8).unwrap())
    });
    c.bench_function("claimed_bound_combinatorial(2^20, 8, d!)", |b| {
        b.iter(|| claimed_bound_combinatorial(black_box(1 << 20), 8, Factor::Factorial).unwrap())
    });
}

criterion_group!(benches, oracle, trees, bounds);
criterion_main!(benches);
