use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use voa_core::ideals::{self, Side};
use voa_core::lifilt::Filtration;
use voa_core::recovery;
use voa_core::sweep::{self, SweepConfig};
use voa_core::{par, Model, Strategy};

const STRATEGIES: [Strategy; 2] = [Strategy::Sequential, Strategy::Parallel];

fn name(s: Strategy) -> &'static str {
    match s {
        Strategy::Sequential => "sequential",
        Strategy::Parallel => "parallel",
    }
}

fn axiom_sweep(c: &mut Criterion) {
    let model = Model::rank_one(7).unwrap();
    let mut group = c.benchmark_group("axiom_sweep");
    group.sample_size(10);
    for s in STRATEGIES {
        let mut cfg = SweepConfig::exhaustive(5);
        cfg.random_samples = 40;
        cfg.random_max_degree = 6;
        cfg.strategy = s;
        group.bench_with_input(BenchmarkId::from_parameter(name(s)), &cfg, |b, cfg| {
            b.iter(|| black_box(sweep::axiom_sweep(&model, cfg).unwrap()))
        });
    }
    group.finish();
}

fn closure_and_fullness(c: &mut Criterion) {
    let model = Model::rank_one(9).unwrap();
    let filt = Filtration::build(&model).unwrap();
    let xs = model.basis_states(4).unwrap();
    let mut group = c.benchmark_group("closure_fullness");
    group.sample_size(10);
    for s in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name(s)), &s, |b, &s| {
            b.iter(|| {
                let out = par::try_map(s, &xs, |x| {
                    let ideal = ideals::closure(&model, std::slice::from_ref(x), Side::Right, Strategy::Sequential)?;
                    ideals::is_full(&filt, &ideal.family)
                })
                .unwrap();
                black_box(out)
            })
        });
    }
    group.finish();
}

fn filtration_laws(c: &mut Criterion) {
    let model = Model::rank_one(8).unwrap();
    let filt = Filtration::build(&model).unwrap();
    let mut group = c.benchmark_group("filtration_laws");
    group.sample_size(10);
    for s in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name(s)), &s, |b, &s| {
            b.iter(|| black_box(filt.check_laws(&model, 8, s).unwrap()))
        });
    }
    group.finish();
}

fn recovery_pairs(c: &mut Criterion) {
    let model = Model::rank_one(11).unwrap();
    let mut pairs = Vec::new();
    for h in 1..=5 {
        for k in 1..=6 - h {
            for a in model.basis_states(h).unwrap() {
                for b in model.basis_states(k).unwrap() {
                    pairs.push((a.clone(), b));
                }
            }
        }
    }
    let mut group = c.benchmark_group("recovery");
    group.sample_size(10);
    for s in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name(s)), &s, |b, &s| {
            b.iter(|| black_box(par::try_map(s, &pairs, |(x, y)| recovery::recover_bracket(&model, x, y)).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    axiom_sweep,
    closure_and_fullness,
    filtration_laws,
    recovery_pairs
);
criterion_main!(benches);
