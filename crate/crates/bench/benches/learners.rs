use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use pdql_bench::lattice_with_oracle;
use pdql_core::algorithms::{
    default_params, dql_run, pdql_run, pql_run, qlearning_run, vrql_run, PqlParams,
    QLearningParams, VrqlParams,
};
use pdql_core::bounds::{comparison_bounds, BoundInputs};
use pdql_core::mdp::value_iteration;
use pdql_core::submdp::plan_centers;

const GAMMA: f64 = 0.5;
const BUDGET: u64 = 200_000;

fn learners(c: &mut Criterion) {
    let (spec, oracle) = lattice_with_oracle(50, GAMMA);
    let pdql = default_params(0.05, 0.05, GAMMA, 50, 4)
        .unwrap()
        .with_q(200)
        .with_max_timesteps(BUDGET);
    let mut group = c.benchmark_group("learners_200k_samples");
    group.sample_size(10);
    group.bench_function("pdql", |b| {
        b.iter(|| {
            pdql_run(&spec, &pdql, &oracle, black_box(1))
                .map_or_else(|e| e.to_string().len(), |t| t.points.len())
        })
    });
    group.bench_function("dql", |b| {
        b.iter(|| {
            dql_run(&spec, &pdql, &oracle, black_box(1))
                .map_or_else(|e| e.to_string().len(), |t| t.points.len())
        })
    });
    let ql = QLearningParams::new(BUDGET);
    group.bench_function("qlearning", |b| {
        b.iter(|| {
            qlearning_run(&spec, &ql, &oracle, black_box(1))
                .unwrap()
                .points
                .len()
        })
    });
    let pql = PqlParams::new(100, BUDGET);
    group.bench_function("pql", |b| {
        b.iter(|| {
            pql_run(&spec, &pql, &oracle, black_box(1))
                .unwrap()
                .points
                .len()
        })
    });
    let vrql = VrqlParams::new(BUDGET);
    group.bench_function("vrql", |b| {
        b.iter(|| {
            vrql_run(&spec, &vrql, &oracle, black_box(1))
                .unwrap()
                .points
                .len()
        })
    });
    group.finish();
}

fn oracles(c: &mut Criterion) {
    let (spec, _) = lattice_with_oracle(500, 0.9);
    c.bench_function("value_iteration_s500_g0.9", |b| {
        b.iter(|| value_iteration(black_box(&spec), 1e-10).unwrap())
    });
    c.bench_function("plan_centers_s500", |b| {
        b.iter_batched(
            || spec.clone(),
            |s| plan_centers(&s, 0.25, 0.1).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn bounds(c: &mut Criterion) {
    let inputs = BoundInputs::new(0.01, 0.001, 0.9, 1000, 4).unwrap();
    c.bench_function("comparison_bounds", |b| {
        b.iter(|| comparison_bounds(black_box(&inputs)).unwrap())
    });
}

criterion_group!(benches, learners, oracles, bounds);
criterion_main!(benches);
