use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polylab_bench::{standard_cases, BENCH_SEED};
use polylab_core::experiments::{condition_ratio_table, digits_of_accuracy};
use polylab_core::solvers::{solve_gb_elimination_example, solve_system};

fn solvers(c: &mut Criterion) {
    let cases = standard_cases().expect("bench fixtures");
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    for case in &cases {
        for &method in &case.methods {
            group.bench_with_input(BenchmarkId::new(method.tag(), &case.name), &case.system, |b, s| {
                b.iter(|| solve_system(black_box(s), method, false, BENCH_SEED).expect("solve"))
            });
        }
    }
    group.finish();
}

fn closed_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed-form");
    for d in [2usize, 4, 6] {
        group.bench_with_input(BenchmarkId::new("gb", d), &d, |b, &d| {
            b.iter(|| {
                let out = solve_gb_elimination_example(d, black_box(0.5), 0, 1.0 / 3.0).expect("gb");
                digits_of_accuracy(out.error)
            })
        });
    }
    group.finish();
    c.bench_function("ratio-table-d2", |b| b.iter(|| condition_ratio_table(2, black_box(1e-2), 4.0, BENCH_SEED).expect("table")));
}

criterion_group!(benches, solvers, closed_form);
criterion_main!(benches);
