use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use morl_core::algorithms::{run_exploration, run_planning_tch, run_tchrl};
use morl_core::envs;
use morl_core::oracle::{exact_min_stch, exact_min_tch};
use morl_core::pareto::enumerate_fronts;
use morl_core::{PolicyClass, Preference, RunConfig};

fn fronts(c: &mut Criterion) {
    let m = envs::random_momdp(4, 2, 3, 2, 0);
    c.bench_function("enumerate_fronts 4x2x3", |b| b.iter(|| enumerate_fronts(black_box(&m)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let m = envs::random_momdp(3, 2, 3, 3, 1);
    let pref = Preference::normalized(&[1.0, 2.0, 3.0]).unwrap();
    c.bench_function("exact_min_tch stochastic", |b| {
        b.iter(|| exact_min_tch(black_box(&m), &pref, 1e-3, PolicyClass::Stochastic).unwrap())
    });
    c.bench_function("exact_min_stch stochastic", |b| {
        b.iter(|| exact_min_stch(black_box(&m), &pref, 1e-3, 0.05, PolicyClass::Stochastic).unwrap())
    });
}

fn learners(c: &mut Criterion) {
    let m = envs::random_momdp(5, 2, 2, 2, 0);
    let cfg = RunConfig::new(1000).with_preference(Preference::uniform(2));
    c.bench_function("run_tchrl 1000 rounds", |b| b.iter(|| run_tchrl(black_box(&m), &cfg).unwrap()));
    c.bench_function("run_exploration 1000 rounds", |b| {
        b.iter(|| run_exploration(black_box(&m), &RunConfig::new(1000)).unwrap())
    });
    let dataset = run_exploration(&m, &RunConfig::new(2000)).unwrap();
    let mut plan = cfg.clone();
    plan.planning_rounds = Some(500);
    c.bench_function("run_planning_tch 500 rounds", |b| {
        b.iter(|| run_planning_tch(black_box(&m), &dataset, &plan).unwrap())
    });
}

criterion_group!(benches, fronts, oracle, learners);
criterion_main!(benches);
