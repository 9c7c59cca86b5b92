use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use lacheck::eval::{sample_points, EvalMode};
use lacheck::examples;
use lacheck::model::Model;
use lacheck::runner::{run, RunOptions};

fn model(name: &str) -> Model {
    Model::from_json(examples::source(name).unwrap()).unwrap()
}

fn block_evaluation(c: &mut Criterion) {
    let m = model("so3_action_algebroid");
    let (jacobi, _) = m.algebroid.jacobi_residual();
    let mut group = c.benchmark_group("jacobi_block");
    for n in [64, 1024] {
        let points = sample_points(&m.chart, n, 1);
        for (label, mode) in [("parallel", EvalMode::Parallel), ("sequential", EvalMode::Sequential)] {
            group.bench_with_input(BenchmarkId::new(label, n), &points, |b, p| {
                b.iter(|| jacobi.evaluate(p, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn full_report(c: &mut Criterion) {
    let m = model("rotation_momentum_map");
    let mut group = c.benchmark_group("full_report");
    group.sample_size(10);
    for (label, mode) in [("parallel", EvalMode::Parallel), ("sequential", EvalMode::Sequential)] {
        let opts = RunOptions { points: Some(256), mode, ..RunOptions::default() };
        group.bench_function(label, |b| b.iter(|| run(&m, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, block_evaluation, full_report);
criterion_main!(benches);
