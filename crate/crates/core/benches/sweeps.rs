use std::hint::black_box;

use bethe_segment::boundary::TransferCase;
use bethe_segment::config::RunConfig;
use bethe_segment::par::Executor;
use bethe_segment::solver::{solve_bethe, SolverOptions};
use bethe_segment::suites::{run_suite, RunOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const EXECUTORS: [(&str, Executor); 2] = [("sequential", Executor::Sequential), ("parallel", Executor::Parallel)];

fn suite_sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite");
    group.sample_size(10);
    let cfg = RunConfig { n: Some(4), samples: Some(8), ..RunConfig::default() };
    for id in ["abcd-relations", "offshell-diag"] {
        for (name, executor) in EXECUTORS {
            let opts = RunOptions { executor, record_timing: false };
            group.bench_with_input(BenchmarkId::new(id, name), &opts, |b, opts| {
                b.iter(|| black_box(run_suite(id, &cfg, opts).unwrap()))
            });
        }
    }
    group.finish();
}

fn solver_starts(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    let p = RunConfig::default().model(3, TransferCase::LowerUpper).unwrap();
    for (name, executor) in EXECUTORS {
        let opts = SolverOptions { executor, ..SolverOptions::default() };
        group.bench_with_input(BenchmarkId::new("lower-upper-n3", name), &opts, |b, opts| {
            b.iter(|| black_box(solve_bethe(TransferCase::LowerUpper, 3, &p, opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, suite_sweeps, solver_starts);
criterion_main!(benches);
