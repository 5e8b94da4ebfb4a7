use criterion::{black_box, criterion_group, criterion_main, Criterion};
use eleanor_bench::plan_instance;
use eleanor_core::agents::{eleanor_plan, grid_oracle_plan};
use eleanor_core::PlannerConfig;

fn planner(c: &mut Criterion) {
    let inst = plan_instance(3);
    let cfg = PlannerConfig::default();
    c.bench_function("eleanor_plan", |b| {
        b.iter(|| eleanor_plan(black_box(&inst.inputs()), &cfg, 0, &[1]).unwrap())
    });
    c.bench_function("grid_oracle_plan_17", |b| b.iter(|| grid_oracle_plan(black_box(&inst.inputs()), 17).unwrap()));
}

criterion_group!(benches, planner);
criterion_main!(benches);
